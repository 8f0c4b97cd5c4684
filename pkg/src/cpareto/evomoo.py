"""Constrained evolutionary optimization and strategy orchestration.

NSGA-II approximates the front of one coalition structure; CSO handles
the single-objective runs that pin the per-coalition extreme points and
the welfare point.  Three orchestration strategies produce archives for
every coalition structure:

* non-nested: one independent NSGA-II run per structure;
* top-down:   one NSGA-II run for the all-singletons structure, every
  other archive by restriction (zero further model evaluations);
* bottom-up:  short coarse-to-fine warm-up runs whose solutions seed
  finer problems, then the singleton run, then restriction.

Randomness comes from counter-based Philox streams keyed by the run
seed plus a stable per-run salt, so identical inputs reproduce archives
bit for bit.  Every physics evaluation increments one counter inside
``physics.Evaluator``; the budget report is read off that counter.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernels
from .coalitions import CoalitionStructure, aggregation_map, enumerate_structures, is_refinement
from .errors import EmptyArchive, NoFeasibleFound, ScenarioError
from .pareto import ObjectivePoint, ParetoArchive, restrict_archive
from .physics import Evaluator, Scenario


class StrategyKind(Enum):
    NON_NESTED = "nonnested"
    BOTTOM_UP = "bottomup"
    TOP_DOWN = "topdown"


@dataclass(frozen=True)
class EvoConfig:
    """Run settings for NSGA-II/CSO; all genetic knobs are explicit."""

    pop_size: int = 100
    generations: int = 100
    seed: int = 0
    crossover_rate: float = 0.9
    crossover_eta: float = 20.0
    mutation_rate: float | None = None  # None -> 1 / n_dv
    mutation_eta: float = 20.0
    cso_pop_size: int = 50
    cso_generations: int = 100
    cso_phi: float = 0.1
    constraint_mode: str = "feasibility-first"
    partial_fraction: float = 0.25  # share of generations for bottom-up warm-ups

    def __post_init__(self):
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError("population size must be even and >= 4")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ValueError("mutation rate must lie in [0, 1]")
        if self.constraint_mode != "feasibility-first":
            raise ValueError("only feasibility-first constraint handling is implemented")

    def to_dict(self) -> dict:
        return {
            "pop_size": self.pop_size,
            "generations": self.generations,
            "seed": self.seed,
            "crossover_rate": self.crossover_rate,
            "crossover_eta": self.crossover_eta,
            "mutation_rate": self.mutation_rate,
            "mutation_eta": self.mutation_eta,
            "cso_pop_size": self.cso_pop_size,
            "cso_generations": self.cso_generations,
            "cso_phi": self.cso_phi,
            "constraint_mode": self.constraint_mode,
            "partial_fraction": self.partial_fraction,
        }


@dataclass
class EvalBudgetReport:
    """Model-evaluation accounting per phase; totals match the counter."""

    extreme_evals: int = 0
    moo_evals: int = 0
    postprocess_evals: int = 0
    n_extreme_runs: int = 0
    n_moo_runs: int = 0

    @property
    def total(self) -> int:
        return self.extreme_evals + self.moo_evals + self.postprocess_evals

    def to_dict(self) -> dict:
        return {
            "extreme_evals": self.extreme_evals,
            "moo_evals": self.moo_evals,
            "postprocess_evals": self.postprocess_evals,
            "n_extreme_runs": self.n_extreme_runs,
            "n_moo_runs": self.n_moo_runs,
            "total": self.total,
        }


def _rng(seed: int, salt_text: str) -> np.random.Generator:
    salt = int.from_bytes(hashlib.sha256(salt_text.encode()).digest()[:8], "big")
    key = ((salt << 64) | (seed & 0xFFFFFFFFFFFFFFFF)) & ((1 << 128) - 1)
    return np.random.Generator(np.random.Philox(key=key))


def _latin_hypercube(rng: np.random.Generator, n: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    d = lo.shape[0]
    u = (rng.random((n, d)) + np.stack([rng.permutation(n) for _ in range(d)], axis=1)) / n
    return lo + u * (hi - lo)


def _initial_population(problem, rng, n: int, seeds: list[np.ndarray]) -> np.ndarray:
    lo, hi = problem.lower, problem.upper
    rows = [np.clip(np.asarray(s, dtype=np.float64), lo, hi) for s in seeds[:n]]
    rows.append(lo.copy())  # guaranteed-feasible start on the bundled scenarios
    fill = n - len(rows)
    if fill > 0:
        rows = rows + list(_latin_hypercube(rng, fill, lo, hi))
    return np.vstack(rows[:n])


def _objectives(values: np.ndarray, weight_rows: np.ndarray) -> np.ndarray:
    return values @ weight_rows.T


def _constrained_ranks(objs: np.ndarray, viol: np.ndarray, feas: np.ndarray) -> np.ndarray:
    """Feasibility-first fronts: feasible by dominance, infeasible after,
    ordered by violation."""
    n = objs.shape[0]
    ranks = np.zeros(n, dtype=np.int64)
    fi = np.flatnonzero(feas)
    ii = np.flatnonzero(~feas)
    top = 0
    if fi.size:
        ranks[fi] = kernels.nondominated_ranks(objs[fi])
        top = int(ranks[fi].max()) + 1
    if ii.size:
        order = np.unique(viol[ii])
        lookup = {v: i for i, v in enumerate(order)}
        ranks[ii] = top + np.array([lookup[v] for v in viol[ii]])
    return ranks


def _crowding(objs: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    n, d = objs.shape
    dist = np.zeros(n)
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        if idx.size <= 2:
            dist[idx] = np.inf
            continue
        for k in range(d):
            vals = objs[idx, k]
            order = np.argsort(vals, kind="stable")
            span = vals[order[-1]] - vals[order[0]]
            dist[idx[order[0]]] = np.inf
            dist[idx[order[-1]]] = np.inf
            if span <= 0:
                continue
            gaps = (vals[order[2:]] - vals[order[:-2]]) / span
            dist[idx[order[1:-1]]] += gaps
    return dist


def _tournament(rng, ranks, crowd, viol, feas, n_picks: int) -> np.ndarray:
    n = ranks.shape[0]
    a = rng.integers(0, n, size=n_picks)
    b = rng.integers(0, n, size=n_picks)
    pick = np.empty(n_picks, dtype=np.int64)
    for t in range(n_picks):
        i, j = int(a[t]), int(b[t])
        pick[t] = i if _beats(i, j, ranks, crowd, viol, feas) else j
    return pick


def _beats(i, j, ranks, crowd, viol, feas) -> bool:
    if feas[i] != feas[j]:
        return bool(feas[i])
    if not feas[i]:
        if viol[i] != viol[j]:
            return viol[i] < viol[j]
        return i <= j
    if ranks[i] != ranks[j]:
        return ranks[i] < ranks[j]
    if crowd[i] != crowd[j]:
        return crowd[i] > crowd[j]
    return i <= j


def _sbx(rng, parents: np.ndarray, lo, hi, rate: float, eta: float) -> np.ndarray:
    """Bounded simulated-binary crossover on consecutive parent pairs."""
    n, d = parents.shape
    children = parents.copy()
    do_pair = rng.random(n // 2) <= rate
    do_gene = rng.random((n // 2, d)) <= 0.5
    u = rng.random((n // 2, d))
    for p in range(n // 2):
        if not do_pair[p]:
            continue
        x1 = children[2 * p]
        x2 = children[2 * p + 1]
        for k in range(d):
            if not do_gene[p, k] or abs(x1[k] - x2[k]) < 1e-14:
                continue
            y1, y2 = (x1[k], x2[k]) if x1[k] < x2[k] else (x2[k], x1[k])
            span = y2 - y1
            uu = u[p, k]
            beta = 1.0 + 2.0 * (y1 - lo[k]) / span
            alpha = 2.0 - beta ** -(eta + 1.0)
            bq1 = _beta_q(uu, alpha, eta)
            c1 = 0.5 * ((y1 + y2) - bq1 * span)
            beta = 1.0 + 2.0 * (hi[k] - y2) / span
            alpha = 2.0 - beta ** -(eta + 1.0)
            bq2 = _beta_q(uu, alpha, eta)
            c2 = 0.5 * ((y1 + y2) + bq2 * span)
            x1[k] = min(max(c1, lo[k]), hi[k])
            x2[k] = min(max(c2, lo[k]), hi[k])
    return children


def _beta_q(u: float, alpha: float, eta: float) -> float:
    if u <= 1.0 / alpha:
        return (u * alpha) ** (1.0 / (eta + 1.0))
    return (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))


def _poly_mutation(rng, pop: np.ndarray, lo, hi, rate: float, eta: float) -> np.ndarray:
    n, d = pop.shape
    out = pop.copy()
    do = rng.random((n, d)) <= rate
    u = rng.random((n, d))
    span = hi - lo
    for i in range(n):
        for k in range(d):
            if not do[i, k] or span[k] <= 0:
                continue
            x = out[i, k]
            d1 = (x - lo[k]) / span[k]
            d2 = (hi[k] - x) / span[k]
            uu = u[i, k]
            mpow = 1.0 / (eta + 1.0)
            if uu <= 0.5:
                val = 2.0 * uu + (1.0 - 2.0 * uu) * (1.0 - d1) ** (eta + 1.0)
                delta = val ** mpow - 1.0
            else:
                val = 2.0 * (1.0 - uu) + 2.0 * (uu - 0.5) * (1.0 - d2) ** (eta + 1.0)
                delta = 1.0 - val ** mpow
            out[i, k] = min(max(x + delta * span[k], lo[k]), hi[k])
    return out


class _EliteArchive:
    """All feasible non-dominated evaluated points (exact elitism)."""

    def __init__(self, weight_rows: np.ndarray):
        self.weight_rows = weight_rows
        self.decisions: np.ndarray | None = None
        self.values: np.ndarray | None = None

    def update(self, decisions: np.ndarray, values: np.ndarray, feas: np.ndarray):
        if not feas.any():
            return
        newd, newv = decisions[feas], values[feas]
        if self.decisions is None:
            alld, allv = newd, newv
        else:
            alld = np.vstack([self.decisions, newd])
            allv = np.vstack([self.values, newv])
        mask = kernels.nondominated_mask(_objectives(allv, self.weight_rows))
        self.decisions, self.values = alld[mask], allv[mask]


def _nsga2_core(problem, weight_rows: np.ndarray, config: EvoConfig, seeds, salt: str):
    """Runs the generational loop; returns the elite archive arrays."""
    rng = _rng(config.seed, salt)
    lo, hi = problem.lower, problem.upper
    mut_rate = config.mutation_rate if config.mutation_rate is not None else 1.0 / problem.n_dv

    pop = _initial_population(problem, rng, config.pop_size, list(seeds))
    values, viol = problem.evaluate(pop)
    feas = viol <= problem.feas_tol
    elite = _EliteArchive(weight_rows)
    elite.update(pop, values, feas)

    for _ in range(config.generations):
        objs = _objectives(values, weight_rows)
        ranks = _constrained_ranks(objs, viol, feas)
        crowd = _crowding(objs, ranks)
        parents = pop[_tournament(rng, ranks, crowd, viol, feas, config.pop_size)]
        children = _sbx(rng, parents, lo, hi, config.crossover_rate, config.crossover_eta)
        children = _poly_mutation(rng, children, lo, hi, mut_rate, config.mutation_eta)
        cvalues, cviol = problem.evaluate(children)
        cfeas = cviol <= problem.feas_tol
        elite.update(children, cvalues, cfeas)

        pop = np.vstack([pop, children])
        values = np.vstack([values, cvalues])
        viol = np.concatenate([viol, cviol])
        feas = np.concatenate([feas, cfeas])
        objs = _objectives(values, weight_rows)
        ranks = _constrained_ranks(objs, viol, feas)
        crowd = _crowding(objs, ranks)
        order = np.lexsort((np.arange(len(pop)), -crowd, ranks))
        keep = order[: config.pop_size]
        pop, values, viol, feas = pop[keep], values[keep], viol[keep], feas[keep]

    return elite.decisions, elite.values


def nsga2(
    evaluator: Evaluator,
    cs: CoalitionStructure,
    config: EvoConfig,
    seeds: list[np.ndarray] | tuple = (),
    salt: str = "nsga2",
) -> ParetoArchive:
    """Front approximation for one coalition structure.

    Feasible seeds that stay non-dominated are guaranteed to be in the
    output (the elite archive keeps every feasible non-dominated point
    ever evaluated).  Bit-reproducible for fixed seed and config.
    """
    gamma = np.asarray(evaluator.scenario.gamma)
    weight_rows = aggregation_map(cs) * gamma
    decisions, values = _nsga2_core(evaluator, weight_rows, config, seeds, f"{salt}|{cs.canonical_key}")
    if decisions is None:
        raise NoFeasibleFound(f"no feasible point found for {cs.canonical_key}")
    points = [
        ObjectivePoint(decision=d, agent_values=v, feasible=True, max_constraint_violation=0.0)
        for d, v in zip(decisions, values)
    ]
    try:
        return ParetoArchive.from_points(cs, evaluator.scenario.gamma, points)
    except EmptyArchive as exc:  # pragma: no cover - elite is nonempty here
        raise NoFeasibleFound(str(exc)) from exc


def cso(
    problem,
    agent_weights: np.ndarray,
    config: EvoConfig,
    seeds: list[np.ndarray] | tuple = (),
    salt: str = "cso",
) -> tuple[np.ndarray, np.ndarray]:
    """Competitive swarm maximization of one weighted-sum objective.

    Pairwise competitions; winners carry over unchanged, losers learn
    from winners and the swarm mean.  Feasibility-first comparisons.
    Returns (best decision, its per-agent values).
    """
    rng = _rng(config.seed, salt)
    lo, hi = problem.lower, problem.upper
    n = config.cso_pop_size
    if n % 2:
        n += 1
    pop = _initial_population(problem, rng, n, list(seeds))
    vel = np.zeros_like(pop)
    values, viol = problem.evaluate(pop)
    feas = viol <= problem.feas_tol
    score = values @ agent_weights

    best_q = best_v = None
    best_score = -np.inf

    def track(q, v, s, f):
        nonlocal best_q, best_v, best_score
        if f and s > best_score:
            best_q, best_v, best_score = q.copy(), v.copy(), float(s)

    for i in range(n):
        track(pop[i], values[i], score[i], feas[i])

    for _ in range(config.cso_generations):
        perm = rng.permutation(n)
        r1 = rng.random((n // 2, problem.n_dv))
        r2 = rng.random((n // 2, problem.n_dv))
        r3 = rng.random((n // 2, problem.n_dv))
        mean = pop.mean(axis=0)
        losers = np.empty(n // 2, dtype=np.int64)
        winners = np.empty(n // 2, dtype=np.int64)
        for p in range(n // 2):
            i, j = int(perm[2 * p]), int(perm[2 * p + 1])
            iw = _cso_beats(i, j, score, viol, feas)
            winners[p], losers[p] = (i, j) if iw else (j, i)
        vel[losers] = (
            r1 * vel[losers]
            + r2 * (pop[winners] - pop[losers])
            + config.cso_phi * r3 * (mean - pop[losers])
        )
        pop[losers] = np.clip(pop[losers] + vel[losers], lo, hi)
        lvalues, lviol = problem.evaluate(pop[losers])
        values[losers], viol[losers] = lvalues, lviol
        feas[losers] = lviol <= problem.feas_tol
        score[losers] = lvalues @ agent_weights
        for p, li in enumerate(losers):
            track(pop[li], values[li], score[li], feas[li])

    if best_q is None:
        raise NoFeasibleFound("competitive swarm found no feasible candidate")
    return best_q, best_v


def _cso_beats(i, j, score, viol, feas) -> bool:
    if feas[i] != feas[j]:
        return bool(feas[i])
    if not feas[i]:
        if viol[i] != viol[j]:
            return viol[i] < viol[j]
        return i <= j
    if score[i] != score[j]:
        return score[i] > score[j]
    return i <= j


EXTREME_EPS = 1e-3  # off-coalition weight in extreme-point runs


def welfare_weights(scenario: Scenario) -> np.ndarray:
    return np.asarray(scenario.gamma, dtype=np.float64)


def extreme_point_seeds(
    evaluator: Evaluator,
    cs: CoalitionStructure,
    config: EvoConfig,
    welfare_point: np.ndarray | None = None,
    report: EvalBudgetReport | None = None,
) -> list[np.ndarray]:
    """One near-extreme CSO run per coalition, plus the welfare point.

    The target coalition gets weight 1 - (|CS|-1) * eps and every other
    coalition eps, so each seed lands at the front end favoring that
    coalition while staying Pareto optimal.
    """
    if len(cs.coalitions) < 2:
        raise ScenarioError("extreme points need at least two coalitions")
    gamma = np.asarray(evaluator.scenario.gamma)
    k = len(cs.coalitions)
    owner = cs.agent_to_coalition()
    seeds = []
    for target in range(k):
        alpha = np.full(k, EXTREME_EPS)
        alpha[target] = 1.0 - (k - 1) * EXTREME_EPS
        aw = np.array([alpha[owner[a]] * gamma[a] for a in range(cs.n_agents)])
        q, _ = cso(
            evaluator, aw, config, salt=f"extreme|{cs.canonical_key}|{target}"
        )
        seeds.append(q)
        if report is not None:
            report.n_extreme_runs += 1
    if welfare_point is None:
        welfare_point, _ = cso(evaluator, welfare_weights(evaluator.scenario), config, salt="welfare")
        if report is not None:
            report.n_extreme_runs += 1
    seeds.append(np.asarray(welfare_point, dtype=np.float64))
    return seeds


def _welfare_archive(
    evaluator: Evaluator, cs_grand: CoalitionStructure, q: np.ndarray, values: np.ndarray
) -> ParetoArchive:
    # values were recorded when the welfare CSO run evaluated q
    point = ObjectivePoint(
        decision=q, agent_values=values, feasible=True, max_constraint_violation=0.0
    )
    return ParetoArchive.from_points(cs_grand, evaluator.scenario.gamma, [point])


def _dedup_pool(pool: list[np.ndarray]) -> list[np.ndarray]:
    seen = set()
    out = []
    for q in pool:
        key = np.asarray(q, dtype=np.float64).tobytes()
        if key not in seen:
            seen.add(key)
            out.append(q)
    return out


def run_strategy(
    scenario: Scenario, strategy: StrategyKind, config: EvoConfig
) -> tuple[dict[str, ParetoArchive], EvalBudgetReport]:
    """Archives for every coalition structure plus the evaluation budget."""
    evaluator = Evaluator(scenario)
    structures = enumerate_structures(scenario.agents)
    singleton = CoalitionStructure.singletons(scenario.n_agents)
    grand = CoalitionStructure.grand(scenario.n_agents)
    report = EvalBudgetReport()

    mark = evaluator.count
    welfare_q, welfare_values = cso(evaluator, welfare_weights(scenario), config, salt="welfare")
    report.n_extreme_runs += 1
    report.extreme_evals += evaluator.count - mark

    archives: dict[str, ParetoArchive] = {}

    if strategy is StrategyKind.NON_NESTED:
        for cs in structures:
            if len(cs.coalitions) == 1:
                archives[cs.canonical_key] = _welfare_archive(evaluator, cs, welfare_q, welfare_values)
                report.n_moo_runs += 1  # trivial single-objective run
                continue
            mark = evaluator.count
            seeds = extreme_point_seeds(evaluator, cs, config, welfare_q, report)
            report.extreme_evals += evaluator.count - mark
            mark = evaluator.count
            archives[cs.canonical_key] = nsga2(evaluator, cs, config, seeds, salt="nonnested")
            report.n_moo_runs += 1
            report.moo_evals += evaluator.count - mark

    elif strategy is StrategyKind.TOP_DOWN:
        mark = evaluator.count
        seeds = extreme_point_seeds(evaluator, singleton, config, welfare_q, report)
        report.extreme_evals += evaluator.count - mark
        mark = evaluator.count
        singleton_archive = nsga2(evaluator, singleton, config, seeds, salt="topdown")
        report.n_moo_runs += 1
        report.moo_evals += evaluator.count - mark
        mark = evaluator.count
        for cs in structures:
            if cs.canonical_key == singleton.canonical_key:
                archives[cs.canonical_key] = singleton_archive
            else:
                archives[cs.canonical_key] = restrict_archive(singleton_archive, cs)
        report.postprocess_evals += evaluator.count - mark

    elif strategy is StrategyKind.BOTTOM_UP:
        pools: dict[str, list[np.ndarray]] = {cs.canonical_key: [] for cs in structures}
        for cs in structures:
            if cs.canonical_key != grand.canonical_key:
                pools[cs.canonical_key].append(welfare_q)
        partial = replace(
            config,
            generations=max(1, int(round(config.generations * config.partial_fraction))),
        )
        for level in range(2, scenario.n_agents):
            for cs in (c for c in structures if len(c.coalitions) == level):
                mark = evaluator.count
                seeds = extreme_point_seeds(evaluator, cs, config, welfare_q, report)
                report.extreme_evals += evaluator.count - mark
                mark = evaluator.count
                part = nsga2(
                    evaluator,
                    cs,
                    partial,
                    _dedup_pool(seeds + pools[cs.canonical_key]),
                    salt="bottomup-partial",
                )
                report.n_moo_runs += 1
                report.moo_evals += evaluator.count - mark
                for finer in structures:
                    if finer.canonical_key != cs.canonical_key and is_refinement(finer, cs):
                        pools[finer.canonical_key].extend(p.decision for p in part.points)
        mark = evaluator.count
        seeds = extreme_point_seeds(evaluator, singleton, config, welfare_q, report)
        report.extreme_evals += evaluator.count - mark
        mark = evaluator.count
        singleton_archive = nsga2(
            evaluator,
            singleton,
            config,
            _dedup_pool(seeds + pools[singleton.canonical_key]),
            salt="bottomup",
        )
        report.n_moo_runs += 1
        report.moo_evals += evaluator.count - mark
        mark = evaluator.count
        for cs in structures:
            if cs.canonical_key == singleton.canonical_key:
                archives[cs.canonical_key] = singleton_archive
            else:
                archives[cs.canonical_key] = restrict_archive(singleton_archive, cs)
        report.postprocess_evals += evaluator.count - mark

    else:  # pragma: no cover
        raise ValueError(f"unknown strategy {strategy}")

    assert report.total == evaluator.count, "evaluation accounting drifted"
    return archives, report
