"""Model catalog, cross-validated grid search and the experiment runners.

Three experiment designs are provided:

* :func:`run_validation` trains and tests on runs of the same query
  (60/20/20 train/cv/test).
* :func:`run_core_holdout` removes one core count from training and
  predicts it (extrapolation when it lies outside the remaining range).
* :func:`run_cross_query` trains on one or more queries and predicts
  another.

All runners drop 3-sigma outlier runs first and check that no test job id
reaches training or cross-validation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import JobProfile, SplitSpec, filter_outliers, shuffle_partition, split
from .errors import (
    DegenerateTraining,
    EmptyInput,
    LeakageError,
    LengthMismatch,
    NonLinearModel,
    NonPositiveActual,
    NumericalError,
    SignatureMismatch,
    UnknownCoreCount,
)
from .features import CoreFeature, FeatureSpec, FeatureVector, as_arrays, prepare
from .linreg import LinearModel, fit_ols
from .svr import Kernel, SvrModel, SvrParams, extract_weights, fit_svr

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_SEED = 20161205
DEFAULT_C_VALUES = (2.0**-4, 2.0**-2, 1.0, 2.0**2, 2.0**4, 2.0**6, 2.0**8, 2.0**10)
DEFAULT_EPS_FRACTIONS = (0.01, 0.02, 0.05, 0.1)
HOLDOUT_TRAIN_FRAC = 0.75


@dataclass(frozen=True)
class ModelFamily:
    kind: str  # "ols" | "svr-linear" | "svr-poly" | "svr-gaussian"
    degree: Optional[int] = None

    @property
    def name(self) -> str:
        return f"svr-poly{self.degree}" if self.kind == "svr-poly" else self.kind

    @property
    def label(self) -> str:
        return {
            "ols": "Linear regression",
            "svr-linear": "Linear SVR",
            "svr-poly": f"Polynomial SVR ({self.degree})",
            "svr-gaussian": "Gaussian SVR",
        }[self.kind]

    @property
    def is_linear(self) -> bool:
        return self.kind in ("ols", "svr-linear")

    @property
    def is_svr(self) -> bool:
        return self.kind != "ols"

    def kernel(self, n: int) -> Kernel:
        if self.kind == "svr-linear":
            return Kernel.linear(n)
        if self.kind == "svr-poly":
            return Kernel.polynomial(n, self.degree)
        if self.kind == "svr-gaussian":
            return Kernel.gaussian(n)
        raise TypeError("OLS has no kernel")

    @classmethod
    def parse(cls, text: str) -> "ModelFamily":
        for fam in ALL_FAMILIES:
            if text == fam.name:
                return fam
        raise ValueError(f"unknown model family {text!r}; expected one of {[f.name for f in ALL_FAMILIES]}")


OLS = ModelFamily("ols")
SVR_LINEAR = ModelFamily("svr-linear")
SVR_GAUSSIAN = ModelFamily("svr-gaussian")
ALL_FAMILIES = (
    OLS,
    SVR_LINEAR,
    ModelFamily("svr-poly", 2),
    ModelFamily("svr-poly", 3),
    ModelFamily("svr-poly", 4),
    ModelFamily("svr-poly", 6),
    SVR_GAUSSIAN,
)
_FAMILY_ORDER = {f: i for i, f in enumerate(ALL_FAMILIES)}


@dataclass(frozen=True)
class SearchGrid:
    c_values: tuple[float, ...] = DEFAULT_C_VALUES
    epsilon_values: tuple[float, ...] = DEFAULT_EPS_FRACTIONS  # fractions of mean |y_train|
    families: tuple[ModelFamily, ...] = ALL_FAMILIES
    core_features: tuple[CoreFeature, ...] = (CoreFeature.InverseCores,)
    tolerance: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        for name in ("c_values", "epsilon_values", "families", "core_features"):
            if not getattr(self, name):
                raise ValueError(f"SearchGrid.{name} must be nonempty")
        if any(c <= 0 for c in self.c_values):
            raise ValueError("C values must be > 0")
        if any(e < 0 for e in self.epsilon_values):
            raise ValueError("epsilon fractions must be >= 0")


@dataclass(frozen=True)
class GridResult:
    model: object
    c: Optional[float]
    epsilon: Optional[float]
    epsilon_frac: Optional[float]
    cv_error: float
    scores: tuple = ()  # (c, eps_frac, cv_error) for every grid point that fitted


@dataclass
class ReportRow:
    family: ModelFamily
    core_feature: CoreFeature
    status: str = "ok"
    reason: Optional[str] = None
    c: Optional[float] = None
    epsilon: Optional[float] = None
    epsilon_frac: Optional[float] = None
    cv_error: Optional[float] = None
    test_error: Optional[float] = None
    weights: Optional[list] = None

    def to_dict(self) -> dict:
        return {
            "family": self.family.name,
            "label": self.family.label,
            "core_feature": self.core_feature.value,
            "status": self.status,
            "reason": self.reason,
            "C": self.c,
            "epsilon": self.epsilon,
            "epsilon_frac": self.epsilon_frac,
            "cv_error": self.cv_error,
            "test_error": self.test_error,
            "weights": None if self.weights is None
            else [{"feature": n, "weight": w} for n, w in self.weights],
        }


@dataclass
class EvaluationReport:
    experiment: str
    tag: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def row(self, family: ModelFamily, core_feature: CoreFeature) -> ReportRow:
        for r in self.rows:
            if r.family == family and r.core_feature == core_feature:
                return r
        raise KeyError((family.name, core_feature.value))

    @property
    def all_not_applicable(self) -> bool:
        return all(r.status != "ok" for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "tag": self.tag,
            "meta": self.meta,
            "rows": [r.to_dict() for r in self.rows],
        }


# --------------------------------------------------------------------------- #
# Metric and selection


def mean_relative_error(pred, actual) -> float:
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if pred.shape != actual.shape or pred.ndim != 1:
        raise LengthMismatch(f"prediction shape {pred.shape} != actual shape {actual.shape}")
    if pred.size == 0:
        raise LengthMismatch("mean relative error of empty lists")
    if np.any(actual <= 0):
        raise NonPositiveActual("actual values must be > 0")
    return float(np.mean(np.abs(pred - actual) / actual))


def _predict(model, vectors: Sequence[FeatureVector]) -> np.ndarray:
    X, _ = as_arrays(vectors)
    return model.predict(X)


def grid_search(
    train: Sequence[FeatureVector],
    cv: Sequence[FeatureVector],
    grid: SearchGrid,
    family: ModelFamily,
    spec: Optional[FeatureSpec] = None,
) -> GridResult:
    """Fit ``family`` at every grid point and keep the one with the lowest cv error.

    OLS has no hyperparameters and is fitted once. Ties go to the smaller C,
    then the smaller epsilon. Grid points whose SVR fit does not converge
    are skipped; if none remains the last numerical error is re-raised.
    """
    if not train or not cv:
        raise EmptyInput("grid search needs nonempty training and cross-validation sets")
    _, y_cv = as_arrays(cv)
    if not family.is_svr:
        model = fit_ols(train)
        err = mean_relative_error(_predict(model, cv), y_cv)
        return GridResult(model, None, None, None, err, ((None, None, err),))

    _, y_train = as_arrays(train)
    scale = float(np.mean(np.abs(y_train)))
    kernel = family.kernel(len(train[0].x))
    spec_ref = spec.fingerprint() if spec is not None else None
    results = []
    last_error = None
    for c in grid.c_values:
        for frac in grid.epsilon_values:
            params = SvrParams(c=c, epsilon=frac * scale, tolerance=grid.tolerance,
                               max_passes=grid.max_passes)
            try:
                model = fit_svr(train, kernel, params, spec_ref)
            except NumericalError as exc:
                log.debug("%s C=%g eps=%g skipped: %s", family.name, c, frac, exc)
                last_error = exc
                continue
            err = mean_relative_error(_predict(model, cv), y_cv)
            results.append((err, c, frac, model))
    if not results:
        raise last_error
    # argmin after collection; tie rule: smaller C, then smaller epsilon
    err, c, frac, model = min(results, key=lambda r: (r[0], r[1], r[2]))
    scores = tuple((r[1], r[2], r[0]) for r in results)
    return GridResult(model, c, frac * scale, frac, err, scores)


def report_weights(model, spec: FeatureSpec) -> list[tuple[str, float]]:
    """(feature name, weight) pairs of a linear model, in feature order."""
    if isinstance(model, LinearModel):
        w = np.asarray(model.w)
    elif isinstance(model, SvrModel) and model.kernel.kind == "linear":
        w = extract_weights(model)
    else:
        raise NonLinearModel(f"weights are undefined for {type(model).__name__}")
    names = spec.names
    if len(names) != len(w):
        raise LengthMismatch(f"{len(names)} feature names but {len(w)} weights")
    return [(n, float(v)) for n, v in zip(names, w)]


# --------------------------------------------------------------------------- #
# Experiment runners


def _signature(profiles: Sequence[JobProfile]) -> str:
    sigs = {p.dag_signature for p in profiles}
    if len(sigs) != 1:
        raise SignatureMismatch(f"profiles must share one DAG signature, found {sorted(sigs)}")
    return sigs.pop()


def _check_leakage(train, cv, test):
    seen = {p.job_id for p in train} | {p.job_id for p in cv}
    leaked = sorted(seen.intersection(p.job_id for p in test))
    if leaked:
        raise LeakageError(f"test job ids present in training data: {leaked[:5]}")


def _ordered_families(grid: SearchGrid):
    return sorted(dict.fromkeys(grid.families), key=lambda f: _FAMILY_ORDER.get(f, len(_FAMILY_ORDER)))


def evaluate(train, cv, test, grid: SearchGrid, standardize: Optional[bool] = None) -> list[ReportRow]:
    """Grid-search every (core feature, family) on train/cv and score on test.

    ``standardize=None`` standardizes features for the SVR families only.
    """
    _check_leakage(train, cv, test)
    signature = _signature(list(train) + list(cv) + list(test))
    y_test = np.array([p.duration_s for p in test])
    rows = []
    for core in grid.core_features:
        for family in _ordered_families(grid):
            scaled = family.is_svr if standardize is None else standardize
            spec, tr, cvv, te = prepare(train, FeatureSpec(signature, core, scaled), cv, test)
            row = ReportRow(family, core)
            try:
                res = grid_search(tr, cvv, grid, family, spec)
            except NumericalError as exc:
                row.status = "not_applicable"
                row.reason = str(exc)
                rows.append(row)
                continue
            row.c, row.epsilon, row.epsilon_frac = res.c, res.epsilon, res.epsilon_frac
            row.cv_error = res.cv_error
            row.test_error = mean_relative_error(_predict(res.model, te), y_test)
            if family.is_linear:
                row.weights = report_weights(res.model, spec)
            rows.append(row)
    return rows


def _counts(train, cv, test, discarded) -> dict:
    return {
        "n_train": len(train),
        "n_cv": len(cv),
        "n_test": len(test),
        "n_discarded": len(discarded),
        "train_job_ids": sorted(p.job_id for p in train),
        "cv_job_ids": sorted(p.job_id for p in cv),
        "test_job_ids": sorted(p.job_id for p in test),
    }


def run_validation(
    profiles: Sequence[JobProfile],
    grid: SearchGrid = SearchGrid(),
    split_spec: Optional[SplitSpec] = None,
    standardize: Optional[bool] = None,
) -> EvaluationReport:
    """Train, select and test on random 60/20/20 slices of one query's runs."""
    if not profiles:
        raise EmptyInput("no profiles to validate on")
    queries = {p.query_id for p in profiles}
    if len(queries) != 1:
        raise SignatureMismatch(f"validation expects a single query, found {sorted(queries)}")
    _signature(profiles)
    split_spec = split_spec or SplitSpec(0.6, 0.2, 0.2, DEFAULT_SEED)
    kept, discarded = filter_outliers(profiles)
    if len(kept) < 3:
        raise EmptyInput(f"only {len(kept)} runs left after outlier filtering; need at least 3")
    train, cv, test = split(kept, split_spec)
    if not train or not cv or not test:
        raise EmptyInput(f"split of {len(kept)} runs left an empty part "
                         f"({len(train)}/{len(cv)}/{len(test)})")
    rows = evaluate(train, cv, test, grid, standardize)
    meta = {"query": queries.pop(), "seed": split_spec.seed,
            "split": [split_spec.train_frac, split_spec.cv_frac, split_spec.test_frac]}
    meta.update(_counts(train, cv, test, discarded))
    return EvaluationReport("validation", meta["query"], rows, meta)


def holdout_annotation(held_out: int, remaining: Sequence[int]) -> str:
    if held_out < min(remaining) or held_out > max(remaining):
        return "extrapolation"
    return "interpolation"


def run_core_holdout(
    profiles: Sequence[JobProfile],
    grid: SearchGrid,
    held_out_cores: int,
    seed: int = DEFAULT_SEED,
    standardize: Optional[bool] = None,
) -> EvaluationReport:
    """Train on every other core count and predict ``held_out_cores``."""
    if not profiles:
        raise EmptyInput("no profiles for core holdout")
    _signature(profiles)
    kept, discarded = filter_outliers(profiles)
    cores = sorted({p.n_cores for p in kept})
    if held_out_cores not in cores:
        raise UnknownCoreCount(f"no runs with {held_out_cores} cores; available: {cores}")
    remaining = [c for c in cores if c != held_out_cores]
    if len(remaining) < 2:
        raise DegenerateTraining(f"only core count(s) {remaining} left for training")
    rest = [p for p in kept if p.n_cores != held_out_cores]
    test = [p for p in kept if p.n_cores == held_out_cores]
    train, cv = shuffle_partition(rest, (HOLDOUT_TRAIN_FRAC, 1 - HOLDOUT_TRAIN_FRAC), seed)
    if not cv:
        raise EmptyInput(f"too few runs ({len(rest)}) to carve out a cross-validation set")
    rows = evaluate(train, cv, test, grid, standardize)
    annotation = holdout_annotation(held_out_cores, remaining)
    queries = sorted({p.query_id for p in kept})
    meta = {"queries": queries, "held_out_cores": held_out_cores,
            "training_cores": remaining, "annotation": annotation, "seed": seed}
    meta.update(_counts(train, cv, test, discarded))
    tag = f"{','.join(queries)}@{held_out_cores}"
    return EvaluationReport("core-holdout", tag, rows, meta)


def cross_query_tag(train_queries: Sequence[str], test_queries: Sequence[str]) -> str:
    return f"{','.join(train_queries)}→{','.join(test_queries)}"


def run_cross_query(
    train_profiles: Sequence[JobProfile],
    test_profiles: Sequence[JobProfile],
    grid: SearchGrid,
    seed: int = DEFAULT_SEED,
    standardize: Optional[bool] = None,
) -> EvaluationReport:
    """Train (75/25 train/cv) on some queries and test on all runs of others."""
    if not train_profiles or not test_profiles:
        raise EmptyInput("cross-query prediction needs nonempty training and test sets")
    if _signature(train_profiles) != _signature(test_profiles):
        raise SignatureMismatch("training and test queries have different DAG signatures")
    kept_train, disc_train = filter_outliers(train_profiles)
    test, disc_test = filter_outliers(test_profiles)
    train, cv = shuffle_partition(kept_train, (HOLDOUT_TRAIN_FRAC, 1 - HOLDOUT_TRAIN_FRAC), seed)
    if not train or not cv or not test:
        raise EmptyInput("too few runs for a train/cv/test partition")
    rows = evaluate(train, cv, test, grid, standardize)
    train_q = list(dict.fromkeys(p.query_id for p in train_profiles))
    test_q = list(dict.fromkeys(p.query_id for p in test_profiles))
    meta = {"train_queries": train_q, "test_queries": test_q, "seed": seed}
    meta.update(_counts(train, cv, test, disc_train + disc_test))
    return EvaluationReport("cross-query", cross_query_tag(train_q, test_q), rows, meta)


def fit_weights(
    profiles: Sequence[JobProfile],
    grid: SearchGrid,
    seed: int = DEFAULT_SEED,
    standardize: Optional[bool] = None,
) -> EvaluationReport:
    """Fit the linear families on all runs (75/25 train/cv) and report their weights.

    Rows carry no test error; the cv error of the selected model is kept.
    """
    if not profiles:
        raise EmptyInput("no profiles to fit weights on")
    signature = _signature(profiles)
    kept, discarded = filter_outliers(profiles)
    train, cv = shuffle_partition(kept, (HOLDOUT_TRAIN_FRAC, 1 - HOLDOUT_TRAIN_FRAC), seed)
    rows = []
    for core in grid.core_features:
        for family in _ordered_families(grid):
            if not family.is_linear:
                raise NonLinearModel(f"{family.label} has no feature weights")
            scaled = family.is_svr if standardize is None else standardize
            spec, tr, cvv = prepare(train, FeatureSpec(signature, core, scaled), cv)
            row = ReportRow(family, core)
            try:
                res = grid_search(tr, cvv, grid, family, spec)
            except NumericalError as exc:
                row.status, row.reason = "not_applicable", str(exc)
            else:
                row.c, row.epsilon, row.epsilon_frac = res.c, res.epsilon, res.epsilon_frac
                row.cv_error = res.cv_error
                row.weights = report_weights(res.model, spec)
            rows.append(row)
    queries = list(dict.fromkeys(p.query_id for p in profiles))
    meta = {"queries": queries, "seed": seed}
    meta.update(_counts(train, cv, [], discarded))
    return EvaluationReport("weights", ",".join(queries), rows, meta)
