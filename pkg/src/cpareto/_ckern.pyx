# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``cpareto._pykern``.

Same contracts and the same pivot logic, loop for loop; see the
fallback module for the reference semantics.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def nondominated_mask(F):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    out = np.ones(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] mask = out
    cdef Py_ssize_t i, j, k
    cdef bint ge, gt
    with nogil:
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                ge = True
                gt = False
                for k in range(d):
                    if A[j, k] < A[i, k]:
                        ge = False
                        break
                    elif A[j, k] > A[i, k]:
                        gt = True
                if ge and gt:
                    mask[i] = 0
                    break
    return out.view(np.bool_)


def nondominated_ranks(F):
    A = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    ranks = np.full(n, -1, dtype=np.int64)
    remaining = np.arange(n)
    cdef long r = 0
    while remaining.size:
        m = nondominated_mask(A[remaining])
        ranks[remaining[m]] = r
        remaining = remaining[~m]
        r += 1
    return ranks


def simplex_loop(
    cnp.ndarray[cnp.float64_t, ndim=2] T,
    cnp.ndarray[cnp.float64_t, ndim=1] xB,
    cnp.ndarray[cnp.int64_t, ndim=1] basis,
    cnp.ndarray[cnp.int8_t, ndim=1] status,
    cnp.ndarray[cnp.float64_t, ndim=1] c,
    cnp.ndarray[cnp.float64_t, ndim=1] L,
    cnp.ndarray[cnp.float64_t, ndim=1] U,
    long max_iter,
    double tol,
):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n_tot = T.shape[1]
    cdef double ratio_tol = 1e-11
    cdef double tie_tol = 1e-10
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(n_tot, dtype=np.float64)
    cdef Py_ssize_t it, i, j, k, enter, leave
    cdef double sigma, d, wi, r, best, ub, piv, entering_val, factor
    cdef long out

    for it in range(max_iter):
        for j in range(n_tot):
            y[j] = 0.0
        for i in range(m):
            d = c[basis[i]]
            if d != 0.0:
                for j in range(n_tot):
                    y[j] += d * T[i, j]
        enter = -1
        sigma = 0.0
        for j in range(n_tot):
            if status[j] == 2 or U[j] - L[j] <= 0.0:
                continue
            d = c[j] - y[j]
            if status[j] == 0 and d > tol:
                enter = j
                sigma = 1.0
                break
            if status[j] == 1 and d < -tol:
                enter = j
                sigma = -1.0
                break
        if enter < 0:
            return OPTIMAL

        best = U[enter] - L[enter]
        leave = -1
        for i in range(m):
            wi = sigma * T[i, enter]
            if wi > ratio_tol:
                r = (xB[i] - L[basis[i]]) / wi
            elif wi < -ratio_tol:
                ub = U[basis[i]]
                if ub == np.inf:
                    continue
                r = (xB[i] - ub) / wi
            else:
                continue
            if r < 0.0:
                r = 0.0
            if r < best - tie_tol:
                best = r
                leave = i
            elif r < best + tie_tol and leave >= 0 and basis[i] < basis[leave]:
                leave = i
        if best == np.inf:
            return UNBOUNDED

        if leave < 0:
            for i in range(m):
                xB[i] -= sigma * best * T[i, enter]
            status[enter] = 1 - status[enter]
            continue

        if status[enter] == 0:
            entering_val = L[enter] + sigma * best
        else:
            entering_val = U[enter] + sigma * best
        for i in range(m):
            xB[i] -= sigma * best * T[i, enter]
        out = basis[leave]
        if sigma * T[leave, enter] > 0:
            status[out] = 0
        else:
            status[out] = 1
        piv = T[leave, enter]
        for k in range(n_tot):
            T[leave, k] /= piv
        for i in range(m):
            if i == leave:
                continue
            factor = T[i, enter]
            if factor != 0.0:
                for k in range(n_tot):
                    T[i, k] -= factor * T[leave, k]
        basis[leave] = enter
        status[enter] = 2
        xB[leave] = entering_val
    return ITERATION_LIMIT
