"""scikit-learn compatible wrappers around the OLS and SVR fitters.

These let the models drop into ``sklearn.pipeline.Pipeline``,
``GridSearchCV`` and friends. The experiment runners in
:mod:`jobperf.pipeline` use the functional layer directly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import JobProfile
from .errors import NonLinearKernel, SignatureMismatch
from .features import CoreFeature, FeatureSpec, as_arrays, build_vectors, prepare
from .linreg import COND_LIMIT, solve_least_squares
from .svr import Kernel, SvrParams, extract_weights, fit_svr_arrays

_KERNEL_ALIASES = {"linear": "linear", "poly": "polynomial", "polynomial": "polynomial",
                   "gaussian": "gaussian", "rbf": "gaussian"}


class OLSRegressor(RegressorMixin, BaseEstimator):
    """Least squares with an intercept; refuses ill-conditioned designs.

    Parameters
    ----------
    cond_limit : float
        Largest accepted condition estimate of the column-equilibrated
        design; above it ``fit`` raises ``IllConditioned``.
    """

    def __init__(self, cond_limit=COND_LIMIT):
        self.cond_limit = cond_limit

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.model_ = solve_least_squares(X, y, self.cond_limit)
        self.coef_ = np.asarray(self.model_.w)
        self.intercept_ = self.model_.b
        self.condition_ = self.model_.condition_estimate
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return self.model_.predict(X)


class EpsilonSVR(RegressorMixin, BaseEstimator):
    """Epsilon-insensitive support vector regression solved with SMO.

    Parameters
    ----------
    kernel : {"linear", "poly", "gaussian"}
        Kernels use a fixed ``1/n_features`` scale and have no width or
        offset parameters.
    degree : int
        Polynomial degree; ignored by the other kernels.
    C : float
        Box bound on the dual coefficients.
    epsilon : float
        Half-width of the insensitive tube, in target units.
    tol : float
        KKT violation tolerance for the solver's stopping rule.
    max_passes : int
        Iteration budget, in multiples of the number of dual variables.
    """

    def __init__(self, kernel="linear", degree=3, C=1.0, epsilon=0.1, tol=1e-3, max_passes=200):
        self.kernel = kernel
        self.degree = degree
        self.C = C
        self.epsilon = epsilon
        self.tol = tol
        self.max_passes = max_passes

    def _kernel(self, n):
        try:
            kind = _KERNEL_ALIASES[self.kernel]
        except KeyError:
            raise ValueError(f"unknown kernel {self.kernel!r}") from None
        return Kernel(kind, n, int(self.degree) if kind == "polynomial" else None)

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        params = SvrParams(c=float(self.C), epsilon=float(self.epsilon),
                           tolerance=float(self.tol), max_passes=int(self.max_passes))
        self.model_ = fit_svr_arrays(X, y, self._kernel(X.shape[1]), params)
        self.support_ = np.asarray(self.model_.support_indices, dtype=int)
        self.dual_coef_ = np.asarray(self.model_.beta)
        self.intercept_ = self.model_.b
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return self.model_.decision(X)

    @property
    def coef_(self):
        check_is_fitted(self, "model_")
        if self.model_.kernel.kind != "linear":
            raise NonLinearKernel("coef_ is only available for the linear kernel")
        return extract_weights(self.model_)


class ProfileVectorizer(TransformerMixin, BaseEstimator):
    """Turn a list of :class:`JobProfile` into a feature matrix.

    ``fit`` records the DAG signature and, when ``standardize`` is set, the
    per-feature mean and sample standard deviation of the training profiles.
    Use :func:`targets` to pull the matching duration vector.
    """

    def __init__(self, core_feature="inverse", standardize=True):
        self.core_feature = core_feature
        self.standardize = standardize

    def fit(self, profiles, y=None):
        profiles = _check_profiles(profiles)
        signature = profiles[0].dag_signature
        core = self.core_feature if isinstance(self.core_feature, CoreFeature) \
            else CoreFeature.parse(self.core_feature)
        spec = FeatureSpec(signature, core, bool(self.standardize))
        self.spec_ = prepare(profiles, spec)[0]
        self.n_features_out_ = self.spec_.n_features
        return self

    def transform(self, profiles):
        check_is_fitted(self, "spec_")
        profiles = _check_profiles(profiles)
        return as_arrays(build_vectors(profiles, self.spec_))[0]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "spec_")
        return np.asarray(self.spec_.names, dtype=object)


def targets(profiles) -> np.ndarray:
    return np.array([p.duration_s for p in _check_profiles(profiles)], dtype=float)


def _check_profiles(profiles) -> list:
    profiles = list(profiles)
    if not profiles:
        raise ValueError("expected at least one JobProfile")
    for p in profiles:
        if not isinstance(p, JobProfile):
            raise TypeError(f"expected JobProfile, got {type(p).__name__}")
    signatures = {p.dag_signature for p in profiles}
    if len(signatures) > 1:
        raise SignatureMismatch(f"profiles mix DAG signatures {sorted(signatures)}")
    return profiles
