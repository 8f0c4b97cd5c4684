"""Brute-force oracles used by the test suite.

Deliberately naive and independent of the engine code paths: no shared
numerical kernels, no shared combinatorics.  Slow is fine here; these
exist so the fast implementations have something dumb to agree with.
"""

from __future__ import annotations

import itertools

import mpmath
import numpy as np

from .errors import TooManyVariables


def pairwise_front(points) -> set[int]:
    """Indices of non-dominated points by explicit O(n^2) comparison."""
    pts = [tuple(map(float, p)) for p in points]
    keep = set()
    for i, p in enumerate(pts):
        dominated = False
        for j, q in enumerate(pts):
            if i == j:
                continue
            if all(b >= a for a, b in zip(p, q)) and any(b > a for a, b in zip(p, q)):
                dominated = True
                break
        if not dominated:
            keep.add(i)
    return keep


def bell_triangle(n: int) -> int:
    """Bell number by the triangle recurrence."""
    if n < 1:
        raise ValueError("n must be positive")
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1]


def split_edges(structures) -> set[tuple[str, str]]:
    """(coarser key, finer key) pairs by exhaustively splitting coalitions.

    For every structure and every coalition with >= 2 members, every way
    of splitting that coalition into two nonempty halves yields a finer
    neighbor.
    """
    keys = {cs.canonical_key for cs in structures}
    edges = set()
    for cs in structures:
        for ci, c in enumerate(cs.coalitions):
            members = list(c.members)
            if len(members) < 2:
                continue
            head, rest = members[0], members[1:]
            for r in range(0, len(rest) + 1):
                for combo in itertools.combinations(rest, r):
                    left = (head, *combo)
                    right = tuple(a for a in members if a not in left)
                    if not right:
                        continue
                    parts = [k.members for j, k in enumerate(cs.coalitions) if j != ci]
                    parts.extend([left, right])
                    finer = type(cs).from_sets(cs.n_agents, parts)
                    assert finer.canonical_key in keys
                    edges.add((cs.canonical_key, finer.canonical_key))
    return edges


def e1_series(x: float, dps: int = 40) -> float:
    """Exponential integral E1 by its power series in high precision.

    The series converges everywhere; evaluating it with mpmath dodges
    the float cancellation that would otherwise ruin it for x > ~15.
    """
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        total = -mpmath.euler - mpmath.log(xm)
        term = mpmath.mpf(1)
        k = 1
        while True:
            term *= -xm / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < mpmath.mpf(10) ** (-dps - 5) * max(abs(total), mpmath.mpf(1e-300)):
                break
            k += 1
            if k > 10000:
                raise RuntimeError("series failed to converge")
        return float(total)


def lp_vertex_oracle(c, A, b, lo, hi):
    """Small-LP oracle: enumerate candidate vertices, keep the feasible best.

    Works for up to three variables.  Candidate vertices are all
    intersections of n active constraints drawn from the rows of A and
    the variable bounds.  Returns (status, best value, best point).
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = c.shape[0]
    if n > 3:
        raise TooManyVariables("vertex oracle handles at most three variables")

    rows = [(A[i], b[i]) for i in range(A.shape[0])]
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        rows.append((e, hi[k]))
        rows.append((-e, -lo[k]))

    best_val, best_x = None, None
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.vstack([rows[i][0] for i in combo])
        rhs = np.array([rows[i][1] for i in combo])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, rhs)
        if np.any(A @ x > b + 1e-8) or np.any(x < lo - 1e-8) or np.any(x > hi + 1e-8):
            continue
        val = float(c @ x)
        if best_val is None or val > best_val:
            best_val, best_x = val, x
    if best_val is None:
        return "infeasible", None, None
    return "optimal", best_val, best_x


def grid_front_oracle(evaluator, weight_rows, resolution: int):
    """Reference front of a tiny problem by dense grid evaluation.

    Evaluates the full grid over the bounds, keeps feasible points, and
    filters dominated ones with a plain row-against-all scan (no shared
    kernel with the engine).  Returns (decisions, objectives).
    """
    n = evaluator.n_dv
    if n > 3:
        raise TooManyVariables("grid oracle handles at most three variables")
    axes = [np.linspace(evaluator.lower[k], evaluator.upper[k], resolution) for k in range(n)]
    mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    values, viol = evaluator.evaluate(mesh)
    feas = viol <= evaluator.feas_tol
    mesh, values = mesh[feas], values[feas]
    objs = values @ np.asarray(weight_rows).T
    keep = []
    for i in range(objs.shape[0]):
        dominated = ((objs >= objs[i]).all(axis=1) & (objs > objs[i]).any(axis=1)).any()
        if not dominated:
            keep.append(i)
    return mesh[keep], objs[keep]
