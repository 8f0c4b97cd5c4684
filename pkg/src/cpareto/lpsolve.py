"""Dense bounded-variable simplex and weighted-sum front sweeps.

The solver is a two-phase primal simplex with Bland's rule, built for
the small dense systems this package produces (tens of variables).
Bland's rule makes degenerate ties deterministic and cycle-free, and
the final solution is recomputed from the terminal basis with one dense
solve, so runs that end in the same basis give bit-identical vectors
regardless of the pivot path.

``wsm_sweep`` traces the Pareto front of one coalition structure by
solving one LP per weight vector of a simplex grid.  The game pipeline
(``sweep_all_structures``) additionally re-solves, for each structure,
the exact objective vectors swept for every coarser structure, so each
vertex found for a coarse front is present verbatim in the finer
archives: the numerical counterpart of the Pareto-set nesting.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .coalitions import (
    CoalitionStructure,
    aggregation_map,
    enumerate_structures,
    is_refinement,
)
from .errors import DimensionMismatch, Infeasible, Unbounded
from .pareto import ObjectivePoint, ParetoArchive
from .physics import Scenario, agent_objectives, assemble_linear

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
EPS_WEIGHT = 1e-3  # floor keeping every grid weight strictly positive


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """max c.q subject to B q <= b and lo <= q <= hi (finite bounds)."""

    c: np.ndarray
    B: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        B = np.atleast_2d(np.asarray(self.B, dtype=np.float64))
        b = np.asarray(self.b, dtype=np.float64)
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        n = c.shape[0]
        if B.size == 0:
            B = B.reshape(0, n)
        if B.shape[1] != n or b.shape[0] != B.shape[0]:
            raise DimensionMismatch("inconsistent LP dimensions")
        if lo.shape[0] != n or hi.shape[0] != n:
            raise DimensionMismatch("bounds must cover every variable")
        if np.any(lo > hi):
            raise DimensionMismatch("lower bound exceeds upper bound")
        for name, a in (("c", c), ("B", B), ("b", b), ("lo", lo), ("hi", hi)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    q: np.ndarray | None
    value: float | None
    iterations: int


def solve_lp(lp: LinearProgram) -> LPResult:
    """Two-phase bounded simplex; deterministic via Bland's rule."""
    m, n = lp.B.shape
    N = n + m  # structurals then slacks

    L = np.concatenate([lp.lo, np.zeros(m)])
    U = np.concatenate([lp.hi, np.full(m, np.inf)])
    basis = np.arange(n, n + m, dtype=np.int64)
    status = np.zeros(N, dtype=np.int8)
    status[basis] = 2
    xB = (lp.b - lp.B @ lp.lo) if m else np.zeros(0)
    T = np.hstack([lp.B, np.eye(m)]) if m else np.zeros((0, N))
    max_iter = 2000 + 200 * (m + n)

    bad = np.flatnonzero(xB < -FEAS_TOL)
    n_art = int(bad.size)
    art_row = {}
    if n_art:
        # phase 1: artificial column -e_r per infeasible row; swapping the
        # slack out of the basis slot flips the sign of that tableau row
        T = np.hstack([T, np.zeros((m, n_art))])
        L = np.concatenate([L, np.zeros(n_art)])
        U = np.concatenate([U, np.full(n_art, np.inf)])
        status = np.concatenate([status, np.zeros(n_art, dtype=np.int8)])
        c1 = np.zeros(N + n_art)
        for idx, row in enumerate(bad):
            col = N + idx
            art_row[col] = int(row)
            T[row, col] = -1.0
            T[row, :] *= -1.0
            status[basis[row]] = 0
            basis[row] = col
            status[col] = 2
            xB[row] = -xB[row]
            c1[col] = -1.0
        code = kernels.simplex_loop(T, xB, basis, status, c1, L, U, max_iter, OPT_TOL)
        if code == kernels.ITERATION_LIMIT:
            raise Unbounded("phase-1 iteration limit hit")
        art_value = float(sum(xB[i] for i in range(m) if basis[i] >= N))
        if art_value > FEAS_TOL * (1.0 + float(np.abs(lp.b).max(initial=0.0))):
            return LPResult(LPStatus.INFEASIBLE, None, None, 1)
        L[N:] = 0.0
        U[N:] = 0.0

    c2 = np.concatenate([lp.c, np.zeros(T.shape[1] - n)])
    code = kernels.simplex_loop(T, xB, basis, status, c2, L, U, max_iter, OPT_TOL)
    if code == kernels.UNBOUNDED:
        return LPResult(LPStatus.UNBOUNDED, None, None, 1)
    if code == kernels.ITERATION_LIMIT:
        raise Unbounded("simplex iteration limit hit")

    # recompute the solution from the terminal basis (pivot-path independent)
    x = np.where(status == 1, np.where(np.isfinite(U), U, L), L)
    if m:
        Gfull = np.hstack([lp.B, np.eye(m)])
        Bmat = np.zeros((m, m))
        for slot, v in enumerate(basis):
            if v < n:
                Bmat[:, slot] = lp.B[:, v]
            elif v < N:
                Bmat[v - n, slot] = 1.0
            else:
                Bmat[art_row[v], slot] = -1.0
        x_nb = x[:N].copy()
        x_nb[basis[basis < N]] = 0.0
        rhs = lp.b - Gfull @ x_nb
        try:
            vals = np.linalg.solve(Bmat, rhs)
        except np.linalg.LinAlgError:
            vals = np.linalg.lstsq(Bmat, rhs, rcond=None)[0]
        for slot, v in enumerate(basis):
            if v < N:
                x[v] = vals[slot]
    q = np.asarray(x[:n], dtype=np.float64)
    return LPResult(LPStatus.OPTIMAL, q, float(lp.c @ q), 1)


@dataclass(frozen=True)
class WeightGrid:
    """Strictly positive weight vectors on the simplex with spacing 1/m.

    Components are floored at EPS_WEIGHT and renormalized, so the corner
    weights become the near-extreme directions that pin down each
    coalition's best value.
    """

    dimension: int
    resolution: int

    def vectors(self) -> np.ndarray:
        d, m = self.dimension, self.resolution
        if d < 1 or m < 1:
            raise DimensionMismatch("need dimension >= 1 and resolution >= 1")
        if d == 1:
            return np.array([[1.0]])
        combos = [
            comp for comp in itertools.product(range(m + 1), repeat=d - 1) if sum(comp) <= m
        ]
        out = np.empty((len(combos), d))
        for i, comp in enumerate(combos):
            out[i, :-1] = comp
            out[i, -1] = m - sum(comp)
        out /= m
        out = np.maximum(out, EPS_WEIGHT)
        out /= out.sum(axis=1, keepdims=True)
        return out


def default_resolution(dimension: int) -> int:
    return {1: 1, 2: 100, 3: 40}.get(dimension, 20)


def coalition_objective_rows(scenario: Scenario, cs: CoalitionStructure) -> np.ndarray:
    """(|CS|, n_dv) objective rows: gamma-weighted member volumes."""
    M_agents = scenario.agent_objective_matrix()
    gamma = np.asarray(scenario.gamma)
    return aggregation_map(cs) @ (gamma[:, None] * M_agents)


def _worker_count() -> int:
    env = os.environ.get("CPARETO_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def wsm_sweep(
    scenario: Scenario,
    cs: CoalitionStructure,
    grid: WeightGrid | None = None,
    extra_costs: np.ndarray | None = None,
) -> ParetoArchive:
    """Trace the front of ``cs`` with one LP per weight vector.

    Collects every optimum, filters dominance and deduplicates into an
    archive.  ``extra_costs`` are additional raw LP objective vectors to
    sweep (the pipeline passes the coarser structures' exact vectors).
    Independent LPs may run on a small thread pool (CPARETO_THREADS);
    assembly follows the weight order, so the result does not depend on
    scheduling.
    """
    if scenario.model != "linear":
        raise DimensionMismatch("weighted-sum sweeps need a linear scenario")
    d = len(cs.coalitions)
    if grid is None:
        grid = WeightGrid(d, default_resolution(d))
    if grid.dimension != d:
        raise DimensionMismatch("grid dimension must match |CS|")
    rows = coalition_objective_rows(scenario, cs)
    costs = grid.vectors() @ rows
    if extra_costs is not None and len(extra_costs):
        costs = np.vstack([costs, extra_costs])
    system = assemble_linear(scenario)

    def solve_one(c: np.ndarray) -> np.ndarray:
        res = solve_lp(LinearProgram(c=c, B=system.B, b=system.b, lo=system.lo, hi=system.hi))
        if res.status is not LPStatus.OPTIMAL:
            raise Infeasible(f"sweep LP ended {res.status.value}")
        return res.q

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(solve_one, costs))
    else:
        solutions = [solve_one(c) for c in costs]

    points = [
        ObjectivePoint(
            decision=q,
            agent_values=agent_objectives(scenario, q),
            feasible=True,
            max_constraint_violation=0.0,
        )
        for q in solutions
    ]
    return ParetoArchive.from_points(cs, scenario.gamma, points)


def sweep_all_structures(
    scenario: Scenario, resolution_for=None, count_lp=None
) -> dict[str, ParetoArchive]:
    """One archive per coalition structure via weighted-sum sweeps.

    Besides its own weight grid, each structure re-solves the exact
    objective vectors of every structure it refines; identical objective
    vectors reach identical vertices, so coarse fronts embed verbatim in
    fine ones.
    """
    if resolution_for is None:
        resolution_for = default_resolution
    structures = enumerate_structures(scenario.agents)
    cost_cache: dict[str, np.ndarray] = {}
    for cs in structures:
        d = len(cs.coalitions)
        grid = WeightGrid(d, resolution_for(d))
        cost_cache[cs.canonical_key] = grid.vectors() @ coalition_objective_rows(scenario, cs)

    archives: dict[str, ParetoArchive] = {}
    for cs in structures:
        inherited = [
            cost_cache[coarse.canonical_key]
            for coarse in structures
            if coarse.canonical_key != cs.canonical_key and is_refinement(cs, coarse)
        ]
        extra = np.vstack(inherited) if inherited else None
        d = len(cs.coalitions)
        archives[cs.canonical_key] = wsm_sweep(
            scenario, cs, WeightGrid(d, resolution_for(d)), extra_costs=extra
        )
        if count_lp is not None:
            n_own = len(cost_cache[cs.canonical_key])
            count_lp(n_own + (len(extra) if extra is not None else 0))
    return archives
