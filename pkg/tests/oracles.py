"""Reference solvers that share no code with the package under test."""

import math

import numpy as np


def gram(kind, A, B, degree=None):
    n = A.shape[1]
    out = np.empty((A.shape[0], B.shape[0]))
    for i, a in enumerate(A):
        for j, c in enumerate(B):
            if kind == "linear":
                out[i, j] = sum(u * v for u, v in zip(a, c))
            elif kind == "polynomial":
                out[i, j] = (sum(u * v for u, v in zip(a, c)) / n) ** degree
            else:
                out[i, j] = math.exp(-sum((u - v) ** 2 for u, v in zip(a, c)) / n)
    return out


def _project(u, s, C):
    """Euclidean projection of u onto {0 <= z <= C, s.z = 0}, s in {-1, +1}."""

    def h(mu):
        return np.sum(s * np.clip(u - mu[..., None] * s, 0.0, C), axis=-1)

    bps = np.unique(np.concatenate([u / s, (u - C) / s]))
    hv = h(bps)
    # h is non-increasing in mu; find the segment where it crosses zero
    if hv[0] < 0 or hv[-1] > 0:
        raise RuntimeError("infeasible projection")
    k = int(np.searchsorted(-hv, 0.0))
    if hv[k] == 0:
        mu = bps[k]
    else:
        lo, hi = bps[k - 1], bps[k]
        flo, fhi = hv[k - 1], hv[k]
        mu = lo + (hi - lo) * flo / (flo - fhi)
    return np.clip(u - mu * s, 0.0, C)


def _objective(Q, p, z):
    return 0.5 * z @ Q @ z + p @ z


def qp_dual_oracle(K, y, C, eps, iters=4000):
    """Solve the epsilon-SVR dual by accelerated projected gradient.

    Variables z = [alpha, alpha*]; after the gradient phase the free set is
    re-solved exactly through its equality-constrained KKT system. Returns
    ``(beta, b, objective)`` with the objective in the beta form
    ``1/2 b'Kb - y'b + eps*|b|_1``.
    """
    K = np.asarray(K, float)
    y = np.asarray(y, float)
    m = len(y)
    s = np.concatenate([np.ones(m), -np.ones(m)])
    Q = np.outer(s, s) * np.block([[K, K], [K, K]])
    p = np.concatenate([eps - y, eps + y])
    L = max(np.linalg.eigvalsh(Q)[-1], 1e-12)

    def residual(v):
        return L * np.max(np.abs(v - _project(v - (Q @ v + p) / L, s, C)))

    z = np.zeros(2 * m)
    w = z.copy()
    t = 1.0
    for k in range(iters):
        if k % 100 == 0:
            zp = _polish(Q, p, s, C, z)
            if residual(zp) < 1e-10 * max(1.0, C):
                z = zp
                break
        z_new = _project(w - (Q @ w + p) / L, s, C)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        w = z_new + (t - 1) / t_new * (z_new - z)
        if _objective(Q, p, z_new) > _objective(Q, p, z):
            w = z_new  # restart momentum
            t_new = 1.0
        z, t = z_new, t_new
    else:
        z = _polish(Q, p, s, C, z)
        # gradient steps crawl on badly scaled Gram matrices; compare with an
        # interior-point solve and keep the better feasible point
        z_ip = _polish(Q, p, s, C, _interior_point(Q, p, s, C))
        if _objective(Q, p, z_ip) < _objective(Q, p, z):
            z = z_ip

    beta = z[:m] - z[m:]
    obj = 0.5 * beta @ K @ beta - y @ beta + eps * np.abs(beta).sum()
    return beta, _bias(K, y, C, eps, z), obj


def _interior_point(Q, p, s, C):
    from cvxopt import matrix, solvers

    k = len(p)
    G = np.vstack([-np.eye(k), np.eye(k)])
    h = np.concatenate([np.zeros(k), np.full(k, C)])
    Qs = 0.5 * (Q + Q.T) + 1e-12 * np.eye(k)
    sol = solvers.qp(matrix(Qs), matrix(p), matrix(G), matrix(h), matrix(s[None, :]), matrix(0.0),
                     options={"show_progress": False, "abstol": 1e-12, "reltol": 1e-12,
                              "feastol": 1e-12, "maxiters": 200})
    z = np.clip(np.array(sol["x"]).ravel(), 0.0, C)
    # restore the equality exactly by a tiny shift on the free variables
    free = (z > 0) & (z < C)
    if free.any():
        z[free] -= s[free] * (s @ z) / free.sum()
        z = np.clip(z, 0.0, C)
    return z


def _polish(Q, p, s, C, z):
    delta = 1e-7 * max(1.0, C)
    best = z
    best_obj = _objective(Q, p, z)
    for d in (delta, 10 * delta, 100 * delta):
        zb = np.where(z < d, 0.0, np.where(z > C - d, C, z))
        F = np.flatnonzero((zb > 0) & (zb < C))
        B = np.setdiff1d(np.arange(len(z)), F)
        if F.size == 0:
            cand = zb
        else:
            A = np.zeros((F.size + 1, F.size + 1))
            A[:-1, :-1] = Q[np.ix_(F, F)]
            A[:-1, -1] = s[F]
            A[-1, :-1] = s[F]
            rhs = np.concatenate([-(p[F] + Q[np.ix_(F, B)] @ zb[B]), [-(s[B] @ zb[B])]])
            sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
            cand = zb.copy()
            cand[F] = sol[:-1]
        if np.all(cand >= -1e-12) and np.all(cand <= C + 1e-12) and abs(s @ cand) < 1e-9 * max(1, C):
            cand = np.clip(cand, 0.0, C)
            obj = _objective(Q, p, cand)
            if obj <= best_obj + 1e-12:
                best, best_obj = cand, obj
    return best


def _bias(K, y, C, eps, z):
    m = len(y)
    a, a_s = z[:m], z[m:]
    tiny = 1e-6 * max(1.0, C)
    beta = a - a_s
    v = y - K @ beta
    vals = [v[i] - eps for i in range(m) if tiny < a[i] < C - tiny]
    vals += [v[i] + eps for i in range(m) if tiny < a_s[i] < C - tiny]
    if vals:
        return float(np.mean(vals))
    # interval bounds from points at 0 or C
    lower, upper = -np.inf, np.inf
    for i in range(m):
        if a[i] < C - tiny:
            lower = max(lower, v[i] - eps)
        if a_s[i] > tiny:
            lower = max(lower, v[i] + eps)
        if a[i] > tiny:
            upper = min(upper, v[i] - eps)
        if a_s[i] < C - tiny:
            upper = min(upper, v[i] + eps)
    if np.all(np.abs(beta) <= tiny):
        return float(min(max(np.mean(y), lower), upper))
    return 0.5 * (lower + upper)


def normal_equations_ols(X, y):
    """OLS by solving (A'A) theta = A'y with A = [X, 1]."""
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    theta = np.linalg.solve(A.T @ A, A.T @ y)
    return theta[:-1], theta[-1]


def hand_mean_std(values):
    """Mean and n-1 standard deviation with explicit sums."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)
