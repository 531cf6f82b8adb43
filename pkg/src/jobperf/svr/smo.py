"""SMO solver for the epsilon-SVR dual.

The dual is posed over the paired multipliers (alpha, alpha*)::

    min  1/2 beta' K beta - y' beta + eps * sum(alpha + alpha*)
    s.t. 0 <= alpha, alpha* <= C,   sum(beta) = 0,   beta = alpha - alpha*

Each iteration moves one "raise beta_p" variable and one "lower beta_q"
variable by the same amount, which keeps ``sum(beta)`` fixed. The first
variable is the maximal KKT violator; the second is chosen by the
second-order gain rule. ``np.argmax``/``np.argmin`` return the lowest index
on ties, so fits are fully deterministic.

Pairwise updates crawl when the Gram matrix is rank deficient (linear
kernel, few features, large C). Every ``polish_every`` iterations the solver
therefore takes one Newton step on the current free face: the equality
constrained subproblem over the free multipliers is solved exactly
(minimum-norm solution) and the step is cut back at the first bound it hits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NoConvergence

TAU = 1e-12


@dataclass
class DualSolution:
    alpha: np.ndarray
    alpha_star: np.ndarray
    b: float
    iterations: int
    gap: float

    @property
    def beta(self) -> np.ndarray:
        return self.alpha - self.alpha_star


def _scores(y, g, eps):
    v = y - g
    return np.concatenate([v - eps, v + eps])


def bias_interval(y, g, alpha, alpha_star, C, eps):
    """Return (lower, upper) bounds on b implied by the non-free multipliers."""
    score = _scores(y, g, eps)
    up = np.concatenate([alpha < C, alpha_star > 0])
    low = np.concatenate([alpha > 0, alpha_star < C])
    lower = score[up].max() if up.any() else -np.inf
    upper = score[low].min() if low.any() else np.inf
    return float(lower), float(upper)


def compute_bias(y, g, alpha, alpha_star, C, eps) -> float:
    free_a = (alpha > 0) & (alpha < C)
    free_s = (alpha_star > 0) & (alpha_star < C)
    v = y - g
    candidates = np.concatenate([v[free_a] - eps, v[free_s] + eps])
    if candidates.size:
        return float(candidates.mean())
    lower, upper = bias_interval(y, g, alpha, alpha_star, C, eps)
    if not (alpha.any() or alpha_star.any()):
        # all multipliers zero: the mean target, kept inside the feasible interval
        return float(np.clip(np.mean(y), lower, upper)) if lower <= upper else 0.5 * (lower + upper)
    return 0.5 * (lower + upper)


def _face_newton_step(K, y, C, eps, alpha, alpha_star, g):
    """One Newton step on the free face; returns the change in beta or None."""
    m = len(y)
    z = np.concatenate([alpha, alpha_star])
    free = np.flatnonzero((z > 0) & (z < C))
    if free.size < 2:
        return None
    pts = free % m
    s = np.where(free < m, 1.0, -1.0)
    grad = s * g[pts] + eps - s * y[pts]
    k = free.size
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = np.outer(s, s) * K[np.ix_(pts, pts)]
    A[:k, k] = s
    A[k, :k] = s
    zf = z[free]
    Qff = A[:k, :k]
    # directions inside the face along which the objective is linear
    _, sv, vt = np.linalg.svd(np.vstack([Qff, s]))
    rank = int(np.sum(sv > 1e-10 * max(sv[0], 1.0)))
    null = vt[rank:]
    g_null = null.T @ (null @ grad)
    if np.linalg.norm(g_null) > 1e-9 * max(np.linalg.norm(grad), 1e-300):
        d = -g_null
        cap = np.inf
    else:
        rhs = np.concatenate([-grad, [0.0]])
        d = np.linalg.lstsq(A, rhs, rcond=None)[0][:k]
        cap = 1.0
    d -= s * (s @ d) / k
    if not np.all(np.isfinite(d)) or grad @ d >= 0:
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, (C - zf) / d, np.where(d < 0, -zf / d, np.inf))
    t = min(cap, float(ratio.min()))
    if not (0 < t < np.inf):
        return None
    new = zf + t * d
    hit = np.argmin(ratio)
    if ratio[hit] <= 1.0:
        new[hit] = C if d[hit] > 0 else 0.0
    new = np.clip(new, 0.0, C)
    delta_z = new - zf
    alpha_idx = free < m
    alpha[free[alpha_idx]] = new[alpha_idx]
    alpha_star[free[~alpha_idx] - m] = new[~alpha_idx]
    dbeta = np.zeros(m)
    np.add.at(dbeta, pts, s * delta_z)
    return dbeta


def solve_dual(
    K, y, C: float, eps: float, tol: float, max_iter: int, polish_every: int = None
) -> DualSolution:
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    m = y.shape[0]
    alpha = np.zeros(m)
    alpha_star = np.zeros(m)
    g = np.zeros(m)  # K @ beta, maintained incrementally
    diag = np.diag(K).copy()
    pts = np.arange(2 * m) % m
    if polish_every is None:
        polish_every = max(2 * m, 20)

    it = 0
    gap = np.inf
    while True:
        score = _scores(y, g, eps)
        up = np.concatenate([alpha < C, alpha_star > 0])
        low = np.concatenate([alpha > 0, alpha_star < C])
        if not up.any() or not low.any():
            gap = 0.0
            break
        up_score = np.where(up, score, -np.inf)
        i = int(np.argmax(up_score))
        gmax = up_score[i]
        low_score = np.where(low, score, np.inf)
        gap = float(gmax - low_score.min())
        if gap <= tol:
            break
        if it >= max_iter:
            raise NoConvergence(
                {"iterations": it, "gap": gap, "tol": tol, "alpha": alpha, "alpha_star": alpha_star}
            )

        p = i % m
        cand = low & (low_score < gmax)
        curv = diag[p] + diag[pts] - 2.0 * K[p, pts]
        curv = np.where(curv > TAU, curv, TAU)
        diff = gmax - low_score
        gain = np.where(cand, diff * diff / curv, -np.inf)
        j = int(np.argmax(gain))
        q = j % m

        step = diff[j] / curv[j]
        limit_i = C - alpha[p] if i < m else alpha_star[p]
        limit_j = alpha[q] if j < m else C - alpha_star[q]
        lam = min(step, limit_i, limit_j)

        # raise beta_p via variable i
        if i < m:
            alpha[p] = C if lam == limit_i else alpha[p] + lam
        else:
            alpha_star[p] = 0.0 if lam == limit_i else alpha_star[p] - lam
        # lower beta_q via variable j
        if j < m:
            alpha[q] = 0.0 if lam == limit_j else alpha[q] - lam
        else:
            alpha_star[q] = C if lam == limit_j else alpha_star[q] + lam
        if p != q:
            g += lam * (K[:, p] - K[:, q])
        it += 1
        if polish_every and it % polish_every == 0:
            dbeta = _face_newton_step(K, y, C, eps, alpha, alpha_star, g)
            if dbeta is not None:
                g = K @ (alpha - alpha_star)

    beta = alpha - alpha_star
    g = K @ beta
    b = compute_bias(y, g, alpha, alpha_star, C, eps)
    return DualSolution(alpha, alpha_star, b, it, gap)
