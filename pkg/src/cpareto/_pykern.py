"""Pure NumPy implementations of the hot kernels.

Same contracts as the compiled module ``cpareto._ckern``: identical
inputs must give identical outputs (masks, ranks, pivot decisions), so
results do not depend on which backend is active.  All dominance is in
maximization sense.
"""

from __future__ import annotations

import numpy as np

# simplex exit codes
OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

_BLOCK = 256


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of points not dominated by any other row of F.

    Duplicates are all retained: equal rows never dominate each other.
    """
    F = np.ascontiguousarray(F, dtype=np.float64)
    n = F.shape[0]
    mask = np.ones(n, dtype=bool)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        blk = F[lo:hi]
        ge = (F[:, None, :] >= blk[None, :, :]).all(axis=2)
        gt = (F[:, None, :] > blk[None, :, :]).any(axis=2)
        mask[lo:hi] = ~(ge & gt).any(axis=0)
    return mask


def nondominated_ranks(F: np.ndarray) -> np.ndarray:
    """Front index per point (0 = best) by iterative peeling."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    n = F.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    remaining = np.arange(n)
    r = 0
    while remaining.size:
        m = nondominated_mask(F[remaining])
        ranks[remaining[m]] = r
        remaining = remaining[~m]
        r += 1
    return ranks


def simplex_loop(
    T: np.ndarray,
    xB: np.ndarray,
    basis: np.ndarray,
    status: np.ndarray,
    c: np.ndarray,
    L: np.ndarray,
    U: np.ndarray,
    max_iter: int,
    tol: float,
) -> int:
    """Bounded-variable primal simplex pivot loop (maximization).

    T is the current tableau B^-1 [A | I | ...] (m rows, one column per
    variable), xB the basic variable values, ``status`` per variable:
    0 = nonbasic at lower bound, 1 = nonbasic at upper bound, 2 = basic.
    Entering and leaving variables follow Bland's rule (lowest index),
    which makes the walk deterministic and cycle-free.  Arrays are
    updated in place; returns an exit code.
    """
    m, n_tot = T.shape
    ratio_tol = 1e-11
    tie_tol = 1e-10

    for _ in range(max_iter):
        y = np.ascontiguousarray(c[basis]) @ T
        enter = -1
        sigma = 0.0
        for j in range(n_tot):
            if status[j] == 2 or U[j] - L[j] <= 0.0:
                continue
            d = c[j] - y[j]
            if status[j] == 0 and d > tol:
                enter, sigma = j, 1.0
                break
            if status[j] == 1 and d < -tol:
                enter, sigma = j, -1.0
                break
        if enter < 0:
            return OPTIMAL

        w = T[:, enter]
        best = U[enter] - L[enter]  # bound-flip allowance
        leave = -1
        for i in range(m):
            wi = sigma * w[i]
            if wi > ratio_tol:
                r = (xB[i] - L[basis[i]]) / wi
            elif wi < -ratio_tol:
                ub = U[basis[i]]
                if not np.isfinite(ub):
                    continue
                r = (xB[i] - ub) / wi
            else:
                continue
            if r < 0.0:
                r = 0.0
            if r < best - tie_tol:
                best, leave = r, i
            elif r < best + tie_tol and leave >= 0 and basis[i] < basis[leave]:
                leave = i
        if not np.isfinite(best):
            return UNBOUNDED

        if leave < 0:
            # bound flip: entering variable jumps to its other bound
            xB -= sigma * best * w
            status[enter] = 1 - status[enter]
            continue

        entering_val = (L[enter] if status[enter] == 0 else U[enter]) + sigma * best
        xB -= sigma * best * w
        out = basis[leave]
        status[out] = 0 if sigma * w[leave] > 0 else 1
        piv = T[leave, enter]
        T[leave, :] /= piv
        col = T[:, enter].copy()
        col[leave] = 0.0
        T -= np.outer(col, T[leave, :])
        basis[leave] = enter
        status[enter] = 2
        xB[leave] = entering_val
    return ITERATION_LIMIT
