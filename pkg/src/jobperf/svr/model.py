"""Fitting, prediction and serialization of epsilon-SVR models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DimensionMismatch, NoData, NonLinearKernel, NonPositiveC
from .kernels import Kernel
from .smo import solve_dual


@dataclass(frozen=True)
class SvrParams:
    c: float = 1.0
    epsilon: float = 0.1
    tolerance: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if not self.c > 0:
            raise NonPositiveC(f"C must be > 0, got {self.c}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes}")

    def max_iter(self, m: int) -> int:
        # one pass ~ one update per multiplier; small problems get a floor
        return self.max_passes * max(2 * m, 50)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "epsilon": self.epsilon,
            "tolerance": self.tolerance,
            "max_passes": self.max_passes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrParams":
        return cls(float(d["c"]), float(d["epsilon"]), float(d["tolerance"]), int(d["max_passes"]))


@dataclass(frozen=True)
class SvrModel:
    beta: tuple[float, ...]
    support_vectors: tuple[tuple[float, ...], ...]
    b: float
    kernel: Kernel
    params: SvrParams
    spec_ref: Optional[str] = None
    support_indices: tuple[int, ...] = ()
    n_train: int = 0
    iterations: int = field(default=0, compare=False)

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.kernel.n:
            raise DimensionMismatch(f"expected {self.kernel.n} features, got {X.shape[1]}")
        if not self.beta:
            return np.full(X.shape[0], self.b)
        K = self.kernel.gram(np.asarray(self.support_vectors), X)
        return np.asarray(self.beta) @ K + self.b

    predict = decision

    def full_beta(self) -> np.ndarray:
        out = np.zeros(self.n_train)
        out[list(self.support_indices)] = self.beta
        return out

    def to_dict(self) -> dict:
        return {
            "type": "svr",
            "kernel": self.kernel.to_dict(),
            "beta": list(self.beta),
            "sv": [list(v) for v in self.support_vectors],
            "b": self.b,
            "params": self.params.to_dict(),
            "spec_ref": self.spec_ref,
            "support_indices": list(self.support_indices),
            "n_train": self.n_train,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrModel":
        if d.get("type") != "svr":
            raise ValueError(f"not an SVR model: type={d.get('type')!r}")
        return cls(
            beta=tuple(float(v) for v in d["beta"]),
            support_vectors=tuple(tuple(float(u) for u in v) for v in d["sv"]),
            b=float(d["b"]),
            kernel=Kernel.from_dict(d["kernel"]),
            params=SvrParams.from_dict(d["params"]),
            spec_ref=d.get("spec_ref"),
            support_indices=tuple(int(i) for i in d.get("support_indices", ())),
            n_train=int(d.get("n_train", len(d["beta"]))),
        )


def dual_objective(K, y, beta, epsilon: float) -> float:
    """Value of the minimization-form dual at ``beta``."""
    beta = np.asarray(beta, dtype=float)
    return float(0.5 * beta @ K @ beta - np.asarray(y) @ beta + epsilon * np.abs(beta).sum())


def fit_svr_arrays(X, y, kernel: Kernel, params: SvrParams, spec_ref=None) -> SvrModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise NoData("SVR needs at least one training point")
    if X.shape[1] != kernel.n:
        raise DimensionMismatch(f"kernel dimension {kernel.n} != feature length {X.shape[1]}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    K = kernel.gram(X, X)
    sol = solve_dual(K, y, params.c, params.epsilon, params.tolerance, params.max_iter(len(y)))
    beta = sol.beta
    idx = np.flatnonzero(beta != 0)
    return SvrModel(
        beta=tuple(float(v) for v in beta[idx]),
        support_vectors=tuple(tuple(float(u) for u in X[i]) for i in idx),
        b=sol.b,
        kernel=kernel,
        params=params,
        spec_ref=spec_ref,
        support_indices=tuple(int(i) for i in idx),
        n_train=len(y),
        iterations=sol.iterations,
    )


def fit_svr(data: Sequence, kernel: Kernel, params: SvrParams, spec_ref=None) -> SvrModel:
    """Fit epsilon-SVR on a list of :class:`~jobperf.features.FeatureVector`.

    Raises :class:`~jobperf.errors.NoConvergence` when the iteration budget
    runs out before the KKT gap falls below ``params.tolerance``.
    """
    if not data:
        raise NoData("SVR needs at least one training point")
    X = np.array([v.x for v in data], dtype=float)
    y = np.array([v.y for v in data], dtype=float)
    return fit_svr_arrays(X, y, kernel, params, spec_ref)


def predict_svr(model: SvrModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.kernel.n,):
        raise DimensionMismatch(f"expected {model.kernel.n} features, got shape {x.shape}")
    return float(model.decision(x[None, :])[0])


def extract_weights(model: SvrModel) -> np.ndarray:
    """Primal weight vector ``sum_i beta_i x_i`` of a linear-kernel model."""
    if model.kernel.kind != "linear":
        raise NonLinearKernel(f"weights are only defined for the linear kernel, not {model.kernel.kind}")
    if not model.beta:
        return np.zeros(model.kernel.n)
    return np.asarray(model.beta) @ np.asarray(model.support_vectors)


def kkt_violations(model: SvrModel, X, y, tol: float) -> list[int]:
    """Indices of training points breaking the epsilon-SVR optimality conditions.

    With ``r = y - f(x)`` and ``beta`` the point's coefficient:
    ``beta == 0`` needs ``|r| <= eps + tol``; ``0 < |beta| < C`` needs
    ``r`` within ``tol`` of ``sign(beta) * eps``; ``|beta| == C`` needs
    ``sign(beta) * r >= eps - tol``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - model.decision(X)
    beta = model.full_beta()
    C, eps = model.params.c, model.params.epsilon
    at_bound = np.abs(beta) >= C * (1 - 1e-12)
    bad = []
    for i in range(len(y)):
        s = np.sign(beta[i])
        if beta[i] == 0:
            ok = abs(r[i]) <= eps + tol
        elif at_bound[i]:
            ok = s * r[i] >= eps - tol
        else:
            ok = abs(r[i] - s * eps) <= tol
        if not ok:
            bad.append(i)
    return bad
