"""Independent oracles used by the tests.

Everything here is deliberately written against the definitions, not the
library's code paths: double loops, dense scans, power iteration, projected
gradient.  Keep it that way -- these are the other side of every dual-route
check.
"""

import itertools
import math

import numpy as np


def power_iteration_norm(V, iters=2000, tol=1e-14, seed=0):
    """Spectral norm of V via power iteration on V^T V."""
    rng = np.random.default_rng(seed)
    B = V.T @ V
    v = rng.normal(size=V.shape[1])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(iters):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(nw - prev) <= tol * max(1.0, nw):
            break
        prev = nw
    return math.sqrt(float(v @ B @ v))


def rank_loss_double_loop(ranks, ratings):
    """Literal double sum of the pairwise ranking loss."""
    m = len(ratings)
    total = 0.0
    for i in range(m):
        for j in range(m):
            gain = max(0.0, ratings[j] - ratings[i])
            total += gain * (1.0 - np.sign(ranks[i] - ranks[j])) / 2.0
    return total


def weighted_objective(y, alphas, loss, y_train):
    return sum(a * loss(y, yt) for a, yt in zip(alphas, y_train))


def scan_minimum(candidates, alphas, loss, y_train):
    """Full scan of F over candidates; returns (argmin index, value)."""
    vals = [weighted_objective(c, alphas, loss, y_train) for c in candidates]
    idx = int(np.argmin(vals))
    return idx, vals[idx]


def all_permutations(m):
    return [np.array(p, dtype=np.int64) for p in itertools.permutations(range(1, m + 1))]


def project_to_simplex(v):
    """Euclidean projection onto the probability simplex (sort algorithm)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > (css - 1))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def hellinger_objective(p, alphas, Y):
    s = 0.0
    for a, row in zip(alphas, Y):
        s += a * float(((np.sqrt(p) - np.sqrt(row)) ** 2).sum())
    return s


def projected_gradient_hellinger(alphas, Y, iters=20000, floor=1e-14):
    """Minimize sum_i a_i * hellinger^2(p, Y_i) over the simplex by projected
    gradient with Armijo backtracking."""
    Y = np.asarray(Y, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    sqY = np.sqrt(Y)
    b = alphas @ sqY
    a_sum = float(alphas.sum())

    def objective(p):
        return a_sum - 2.0 * float(b @ np.sqrt(p)) + float(alphas @ (Y.sum(axis=1)))

    def grad(p):
        return a_sum - b / np.sqrt(np.maximum(p, floor))

    p = np.full(Y.shape[1], 1.0 / Y.shape[1])
    f = objective(p)
    step = 0.1
    for _ in range(iters):
        g = grad(p)
        cand = project_to_simplex(p - step * g)
        fc = objective(cand)
        if fc < f - 1e-18:
            p, f = cand, fc
            step = min(step * 1.25, 10.0)
        else:
            step *= 0.5
            if step < 1e-16:
                break
    return p


def structured_risk_double_loop(rho, loss_table, f_idx):
    """E(f) by literal double loop; f_idx[ix] indexes the y chosen at x."""
    total = 0.0
    for ix in range(rho.shape[0]):
        for iy in range(rho.shape[1]):
            total += rho[ix, iy] * loss_table[f_idx[ix], iy]
    return total


def dense_grid_min_cauchy(alphas, y_train, gamma, bound, points=1_000_000):
    """Dense-grid minimum of the weighted Cauchy objective (np.log route,
    deliberately not the library's log1p)."""
    grid = np.linspace(-bound, bound, points)
    vals = np.zeros(points)
    for a, yt in zip(alphas, y_train):
        d = grid - yt
        vals += a * (gamma * np.log(1.0 + d * d / gamma))
    i = int(np.argmin(vals))
    return float(grid[i]), float(vals[i])
