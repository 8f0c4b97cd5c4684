"""Dominance machinery, Pareto archives, restriction and front selection.

All objectives are maximized.  An archive holds feasible, mutually
non-dominated decision vectors for one coalition structure; the
objective of coalition C at a point is the gamma-weighted sum of the
member agents' values.  Archives over finer structures contain the
Pareto sets of every coarser structure, which is what ``restrict_archive``
exploits: coarse fronts are obtained from the all-singletons archive by
re-aggregation and filtering, with no new model evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .coalitions import CoalitionStructure, aggregation_map
from .errors import (
    BadAgentIndex,
    DimensionUnsupported,
    EmptyArchive,
    EmptyInput,
    LengthMismatch,
    MismatchedAgentSets,
    NonPositiveWeight,
    PointBelowReference,
)

DEDUP_ATOL = 1e-9


@dataclass(frozen=True)
class ObjectivePoint:
    """One evaluated decision vector with its per-agent values."""

    decision: np.ndarray
    agent_values: np.ndarray
    feasible: bool
    max_constraint_violation: float

    def __post_init__(self):
        d = np.asarray(self.decision, dtype=np.float64)
        v = np.asarray(self.agent_values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise ValueError("agent values must be finite")
        d.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "decision", d)
        object.__setattr__(self, "agent_values", v)


@dataclass(frozen=True)
class UtopiaWeighted:
    """Pick the archive point nearest the utopia point in a weighted Lp norm.

    ``agent_weights`` are per-agent; a coalition's weight is the sum of its
    members' weights.
    """

    agent_weights: tuple[float, ...]
    p: float = 2.0

    def __post_init__(self):
        if any(w <= 0 for w in self.agent_weights):
            raise NonPositiveWeight("agent weights must be strictly positive")
        if self.p < 1:
            raise ValueError("norm exponent must be >= 1")
        object.__setattr__(self, "agent_weights", tuple(float(w) for w in self.agent_weights))


@dataclass(frozen=True)
class FavorAgent:
    """Pick the archive point with the best payoff for one agent."""

    agent: int


SelectionCriterion = UtopiaWeighted | FavorAgent


class ParetoArchive:
    """Feasible, mutually non-dominated points for one coalition structure."""

    def __init__(
        self,
        cs: CoalitionStructure,
        gamma: Sequence[float],
        points: Sequence[ObjectivePoint],
        _validated: bool = False,
    ):
        self.cs = cs
        self.gamma = np.asarray(gamma, dtype=np.float64)
        self.gamma.setflags(write=False)
        if len(self.gamma) != cs.n_agents:
            raise LengthMismatch("one gamma weight per agent")
        self.points = tuple(points)
        if not _validated:
            bad = [p for p in self.points if not p.feasible]
            if bad:
                raise ValueError("archive points must be feasible")
            m = self.coalition_matrix()
            if m.shape[0] and not kernels.nondominated_mask(m).all():
                raise ValueError("archive points must be mutually non-dominated")

    @classmethod
    def from_points(
        cls,
        cs: CoalitionStructure,
        gamma: Sequence[float],
        points: Sequence[ObjectivePoint],
        dedup_atol: float = DEDUP_ATOL,
    ) -> "ParetoArchive":
        """Filter to the feasible non-dominated subset and deduplicate.

        Points whose coalition-objective vectors agree within
        ``dedup_atol`` are collapsed to the first seen.
        """
        feas = [p for p in points if p.feasible]
        if not feas:
            raise EmptyArchive(f"no feasible points for {cs.canonical_key}")
        agg = _coalition_values(cs, gamma, feas)
        keep = np.flatnonzero(kernels.nondominated_mask(agg))
        chosen: list[int] = []
        for idx in keep:
            if all(np.abs(agg[idx] - agg[j]).max() > dedup_atol for j in chosen):
                chosen.append(int(idx))
        return cls(cs, gamma, [feas[i] for i in chosen], _validated=True)

    def coalition_matrix(self) -> np.ndarray:
        """(n_points, |CS|) gamma-aggregated objective values."""
        return _coalition_values(self.cs, self.gamma, self.points)

    def agent_matrix(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, self.cs.n_agents))
        return np.vstack([p.agent_values for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


def _coalition_values(cs, gamma, points) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=np.float64)
    if not points:
        return np.zeros((0, len(cs.coalitions)))
    V = np.vstack([p.agent_values for p in points])
    if V.shape[1] != cs.n_agents:
        raise MismatchedAgentSets("agent value length does not match structure")
    return (V * gamma) @ aggregation_map(cs).T


def dominates(u: Sequence[float], v: Sequence[float]) -> bool:
    """True iff u >= v componentwise with at least one strict component."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatch("objective vectors differ in length")
    return bool(np.all(u >= v) and np.any(u > v))


def non_dominated_filter(points: Sequence[Sequence[float]]) -> set[int]:
    """Indices of points dominated by no other point.  Duplicates all kept."""
    if len(points) == 0:
        raise EmptyInput("need at least one point")
    F = np.asarray(points, dtype=np.float64)
    widths = {len(p) for p in points}
    if len(widths) > 1:
        raise LengthMismatch("objective vectors differ in length")
    return {int(i) for i in np.flatnonzero(kernels.nondominated_mask(F))}


def restrict_archive(
    singleton_archive: ParetoArchive, target_cs: CoalitionStructure
) -> ParetoArchive:
    """Archive for ``target_cs`` from the all-singletons archive.

    Re-aggregates agent values by the target's coalitions, filters
    dominance and deduplicates.  Every surviving decision vector was
    present in the input; no model evaluations happen here.
    """
    src = singleton_archive.cs
    if len(src.coalitions) != src.n_agents:
        raise ValueError("source archive must be over the all-singletons structure")
    if target_cs.n_agents != src.n_agents:
        raise MismatchedAgentSets("target structure is over a different agent set")
    return ParetoArchive.from_points(
        target_cs, singleton_archive.gamma, singleton_archive.points
    )


def utopia_point(archive: ParetoArchive) -> np.ndarray:
    """Componentwise maximum of the coalition objectives over the archive.

    Per-coalition maxima over the feasible set are attained on the
    front, so this equals the true utopia point whenever the archive
    contains the per-coalition extreme points (the sweeps and the
    extreme-point seeding both arrange that).  For archives missing a
    true extreme point the result is an underestimate.
    """
    if len(archive) == 0:
        raise EmptyArchive("utopia point of an empty archive")
    return archive.coalition_matrix().max(axis=0)


def select_utopia(archive: ParetoArchive, criterion: UtopiaWeighted) -> ObjectivePoint:
    """Archive point minimizing the weighted Lp distance to the utopia point.

    Ties go to the lowest point index.
    """
    if len(archive) == 0:
        raise EmptyArchive("selection from an empty archive")
    if len(criterion.agent_weights) != archive.cs.n_agents:
        raise LengthMismatch("one weight per agent")
    beta = np.array(
        [sum(criterion.agent_weights[a] for a in c.members) for c in archive.cs.coalitions]
    )
    m = archive.coalition_matrix()
    gaps = np.abs(beta * (m - m.max(axis=0)))
    dist = (gaps ** criterion.p).sum(axis=1) ** (1.0 / criterion.p)
    return archive.points[int(np.argmin(dist))]


def select_favor_agent(archive: ParetoArchive, agent: int) -> ObjectivePoint:
    """Archive point maximizing one agent's payoff.

    Ties broken by greatest total gamma-weighted sum, then lowest index.
    """
    if len(archive) == 0:
        raise EmptyArchive("selection from an empty archive")
    if not 0 <= agent < archive.cs.n_agents:
        raise BadAgentIndex(f"agent {agent} out of range")
    V = archive.agent_matrix() * archive.gamma
    payoff = V[:, agent]
    best = payoff.max()
    cands = np.flatnonzero(payoff == best)
    totals = V[cands].sum(axis=1)
    return archive.points[int(cands[int(np.argmax(totals))])]


def hypervolume(front: Sequence[Sequence[float]], ref: Sequence[float]) -> float:
    """Lebesgue measure of the union of boxes [ref, point] (maximization).

    Exact sweep in 2D, slicing in 3D; other dimensions are unsupported.
    """
    F = np.asarray(front, dtype=np.float64)
    r = np.asarray(ref, dtype=np.float64)
    if F.ndim != 2 or F.shape[1] != r.shape[0]:
        raise LengthMismatch("front and reference dimensions differ")
    d = F.shape[1]
    if d not in (2, 3):
        raise DimensionUnsupported(f"exact hypervolume implemented for 2D/3D, got {d}D")
    if np.any(F < r):
        raise PointBelowReference("every point must be >= the reference point")
    if d == 2:
        return _hv2(F, r)
    zs = np.unique(F[:, 2])[::-1]
    hv = 0.0
    prev = None
    for z in zs:
        if prev is not None:
            hv += _hv2(F[F[:, 2] >= prev, :2], r[:2]) * (prev - z)
        prev = z
    hv += _hv2(F[:, :2], r[:2]) * (prev - r[2])
    return hv


def _hv2(F: np.ndarray, r: np.ndarray) -> float:
    if F.shape[0] == 0:
        return 0.0
    order = np.lexsort((F[:, 1], -F[:, 0]))
    hv = 0.0
    level = r[1]
    for i in order:
        x, y = F[i]
        if y > level:
            hv += (x - r[0]) * (y - level)
            level = y
    return hv
