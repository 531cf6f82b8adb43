"""Ordinary least squares with conditioning checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, EmptyInput, IllConditioned

COND_LIMIT = 1e8


@dataclass(frozen=True)
class LinearModel:
    w: tuple[float, ...]
    b: float
    condition_estimate: float

    def to_dict(self) -> dict:
        return {"type": "ols", "w": list(self.w), "b": self.b, "cond": self.condition_estimate}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        if d.get("type") != "ols":
            raise ValueError(f"not an OLS model: type={d.get('type')!r}")
        return cls(tuple(float(v) for v in d["w"]), float(d["b"]), float(d["cond"]))

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.w):
            raise DimensionMismatch(f"expected {len(self.w)} features, got {X.shape[1]}")
        return X @ np.asarray(self.w) + self.b


def solve_least_squares(X, y, cond_limit: float = COND_LIMIT) -> LinearModel:
    """Least-squares fit of ``y ~ X w + b`` through a QR factorization.

    The augmented design ``[X, 1]`` is column-equilibrated before factoring,
    so the condition estimate (ratio of extreme singular values of the
    equilibrated matrix) does not depend on feature units.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DimensionMismatch(f"X shape {X.shape} incompatible with y shape {y.shape}")
    m, n = X.shape
    if m < 2:
        raise EmptyInput(f"OLS needs at least 2 points, got {m}")
    A = np.hstack([X, np.ones((m, 1))])
    if m < n + 1:
        raise IllConditioned(np.inf, f"rank deficient: {m} points for {n + 1} coefficients")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise IllConditioned(np.inf, "design matrix has an all-zero column")
    As = A / norms
    Q, R = np.linalg.qr(As, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else float(sv[0] / sv[-1])
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllConditioned(cond)
    z = solve_triangular(R, Q.T @ y)
    theta = z / norms
    return LinearModel(tuple(float(v) for v in theta[:-1]), float(theta[-1]), max(cond, 1.0))


def fit_ols(data: Sequence, cond_limit: float = COND_LIMIT) -> LinearModel:
    """Fit OLS on a list of :class:`~jobperf.features.FeatureVector`."""
    if len(data) < 2:
        raise EmptyInput(f"OLS needs at least 2 points, got {len(data)}")
    X = np.array([v.x for v in data], dtype=float)
    y = np.array([v.y for v in data], dtype=float)
    return solve_least_squares(X, y, cond_limit)


def predict_linear(model: LinearModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (len(model.w),):
        raise DimensionMismatch(f"expected {len(model.w)} features, got shape {x.shape}")
    return float(np.dot(model.w, x) + model.b)
