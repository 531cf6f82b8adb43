"""Exception hierarchy.

Data problems derive from :class:`DataError` (CLI exit status 2); numerical
non-applicability of a fit derives from :class:`NumericalError`.
"""


class JobPerfError(Exception):
    """Base class for all package errors."""


class DataError(JobPerfError, ValueError):
    """Bad or insufficient input data."""


class MissingColumn(DataError):
    def __init__(self, column, path=None):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class MalformedValue(DataError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}: column {column!r}: cannot parse {value!r}")


class InvariantViolation(DataError):
    def __init__(self, row, reason):
        self.row = row
        self.reason = reason
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(f"{prefix}{reason}")


class EmptyInput(DataError):
    pass


class SignatureMismatch(DataError):
    pass


class UnknownCoreCount(DataError):
    pass


class DegenerateTraining(DataError):
    pass


class UnknownQuery(DataError):
    pass


class UnknownScenario(DataError):
    pass


class LeakageError(JobPerfError, AssertionError):
    """A test job id was found in the training or cross-validation data."""


class DimensionMismatch(JobPerfError, ValueError):
    pass


class LengthMismatch(JobPerfError, ValueError):
    pass


class NonPositiveActual(JobPerfError, ValueError):
    pass


class NonLinearKernel(JobPerfError, TypeError):
    pass


class NonLinearModel(JobPerfError, TypeError):
    pass


class NonPositiveC(JobPerfError, ValueError):
    pass


class NoData(DataError):
    pass


class NumericalError(JobPerfError, ArithmeticError):
    """A model family cannot be fitted on the given data."""


class IllConditioned(NumericalError):
    def __init__(self, condition, message=None):
        self.condition = condition
        super().__init__(message or f"design matrix ill-conditioned (cond={condition:.3g})")


class NoConvergence(NumericalError):
    """SMO exhausted its iteration budget; ``diagnostics`` holds the final state."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__(
            "SMO did not converge after {iterations} iterations "
            "(KKT gap {gap:.3g} > tol {tol:.3g})".format(**diagnostics)
        )
