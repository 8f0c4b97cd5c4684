"""Cooperative-game analysis of selected front points.

Applying a front-selection criterion to every structure's archive fixes
one decision vector per structure and therefore a concrete game: each
embedded coalition's value is the gamma-weighted sum of its members'
injected volumes at the selected point, and each agent's payoff is its
own contribution (no transferable utility), so payoffs sum exactly to
the coalition value.

Externalities compare a coalition's value across structures that differ
only by merging two outside coalitions.  Stability asks whether any
allowed set of agents can leave their coalitions, form one new
coalition, and strictly gain more than the margin eta; payoffs for the
deviation are read from the same game table.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .coalitions import AgentSet, Coalition, CoalitionStructure, enumerate_structures
from .errors import EmptyArchive, TooFewAgents
from .pareto import (
    FavorAgent,
    ObjectivePoint,
    ParetoArchive,
    SelectionCriterion,
    UtopiaWeighted,
    select_favor_agent,
    select_utopia,
)

WELFARE_ATOL = 1e-9


class ExternalityClass(Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"
    MIXED = "mixed"
    ZERO = "zero"


class DeviationClass(Enum):
    SINGLE_EXIT = "single"
    PAIR_EXIT = "pair"
    SUBSET_EXIT = "subset"


@dataclass(frozen=True)
class DeviationRule:
    """Which deviating sets are allowed and the strict-improvement margin."""

    classes: frozenset[DeviationClass] = frozenset(
        {DeviationClass.SINGLE_EXIT, DeviationClass.PAIR_EXIT}
    )
    eta: float = 1.0

    def __post_init__(self):
        if not self.classes:
            raise ValueError("at least one deviation class must be enabled")
        if self.eta < 0:
            raise ValueError("margin must be nonnegative")
        object.__setattr__(self, "classes", frozenset(self.classes))


@dataclass(frozen=True)
class ExternalityRecord:
    coalition: Coalition
    coarse: CoalitionStructure  # two outside coalitions merged
    fine: CoalitionStructure
    value: float  # w((C, coarse)) - w((C, fine))


@dataclass(frozen=True)
class GameTable:
    """Selected point, payoffs and embedded-coalition values per structure."""

    agents: AgentSet
    gamma: tuple[float, ...]
    structures: tuple[CoalitionStructure, ...]
    selected: dict[str, ObjectivePoint]
    payoffs: dict[str, np.ndarray]  # per structure, one payoff per agent
    criterion: SelectionCriterion | None = None

    def value(self, coalition: Coalition, cs: CoalitionStructure) -> float:
        """w((C, CS)): the same arithmetic path as the payoff sum."""
        z = self.payoffs[cs.canonical_key]
        total = 0.0
        for a in coalition.members:
            total += float(z[a])
        return total

    def welfare(self, cs: CoalitionStructure) -> float:
        total = 0.0
        for a in range(self.agents.n_agents):
            total += float(self.payoffs[cs.canonical_key][a])
        return total

    def rounded(self, ndigits: int = 0) -> "GameTable":
        """Payoffs rounded for reporting; values stay payoff sums."""
        return replace(
            self,
            payoffs={k: np.round(z, ndigits) for k, z in self.payoffs.items()},
        )

    def structure(self, key: str) -> CoalitionStructure:
        for cs in self.structures:
            if cs.canonical_key == key:
                return cs
        raise KeyError(key)


def build_game(
    archives: dict[str, ParetoArchive],
    criterion: SelectionCriterion,
    agents: AgentSet,
) -> GameTable:
    """Select one point per structure and tabulate values and payoffs."""
    structures = enumerate_structures(agents)
    missing = [cs.canonical_key for cs in structures if cs.canonical_key not in archives]
    if missing:
        raise EmptyArchive(f"missing archives for: {', '.join(missing)}")
    gamma = None
    selected: dict[str, ObjectivePoint] = {}
    payoffs: dict[str, np.ndarray] = {}
    for cs in structures:
        archive = archives[cs.canonical_key]
        gamma = archive.gamma if gamma is None else gamma
        if isinstance(criterion, UtopiaWeighted):
            point = select_utopia(archive, criterion)
        elif isinstance(criterion, FavorAgent):
            point = select_favor_agent(archive, criterion.agent)
        else:
            raise TypeError(f"unknown criterion {type(criterion).__name__}")
        selected[cs.canonical_key] = point
        z = np.asarray(archive.gamma) * point.agent_values
        z.setflags(write=False)
        payoffs[cs.canonical_key] = z
    return GameTable(
        agents=agents,
        gamma=tuple(float(g) for g in gamma),
        structures=tuple(structures),
        selected=selected,
        payoffs=payoffs,
        criterion=criterion,
    )


def externalities(game: GameTable) -> list[ExternalityRecord]:
    """One record per (C, coarse CS, fine CS) merge triple.

    The fine structure contains C plus at least two other coalitions;
    merging any two of the others gives the coarse structure.
    """
    n = game.agents.n_agents
    if n < 3:
        raise TooFewAgents("externalities need at least three agents")
    records: list[ExternalityRecord] = []
    for fine in game.structures:
        k = len(fine.coalitions)
        for ci, c in enumerate(fine.coalitions):
            others = [j for j in range(k) if j != ci]
            if len(others) < 2:
                continue
            for x in range(len(others)):
                for y in range(x + 1, len(others)):
                    i, j = others[x], others[y]
                    parts = [
                        fc.members
                        for idx, fc in enumerate(fine.coalitions)
                        if idx not in (i, j)
                    ]
                    parts.append(fine.coalitions[i].members + fine.coalitions[j].members)
                    coarse = CoalitionStructure.from_sets(n, parts)
                    records.append(
                        ExternalityRecord(
                            coalition=c,
                            coarse=coarse,
                            fine=fine,
                            value=game.value(c, coarse) - game.value(c, fine),
                        )
                    )
    return records


def classify(
    records: list[ExternalityRecord], atol: float = 0.0
) -> ExternalityClass:
    """Zero / Negative / Positive / Mixed from the record signs."""
    neg = any(r.value < -atol for r in records)
    pos = any(r.value > atol for r in records)
    if not neg and not pos:
        return ExternalityClass.ZERO
    if neg and pos:
        return ExternalityClass.MIXED
    return ExternalityClass.NEGATIVE if neg else ExternalityClass.POSITIVE


def social_welfare(game: GameTable) -> tuple[dict[str, float], list[CoalitionStructure]]:
    """Per-structure welfare and the set of maximizers within tolerance."""
    welfare = {cs.canonical_key: game.welfare(cs) for cs in game.structures}
    best = max(welfare.values())
    argmax = [
        cs for cs in game.structures if welfare[cs.canonical_key] >= best - WELFARE_ATOL
    ]
    return welfare, argmax


def _deviating_sets(game: GameTable, rule: DeviationRule):
    n = game.agents.n_agents
    agents = range(n)
    if DeviationClass.SUBSET_EXIT in rule.classes:
        for mask in range(1, 1 << n):
            yield tuple(a for a in agents if mask >> a & 1)
        return
    if DeviationClass.SINGLE_EXIT in rule.classes:
        for a in agents:
            yield (a,)
    if DeviationClass.PAIR_EXIT in rule.classes:
        for a in agents:
            for b in range(a + 1, n):
                yield (a, b)


def _after_deviation(cs: CoalitionStructure, movers: tuple[int, ...]) -> CoalitionStructure:
    """Movers form one new coalition; residual coalitions persist."""
    moving = set(movers)
    parts: list[tuple[int, ...]] = [tuple(sorted(moving))]
    for c in cs.coalitions:
        rest = tuple(a for a in c.members if a not in moving)
        if rest:
            parts.append(rest)
    return CoalitionStructure.from_sets(cs.n_agents, parts)


def stable_structures(game: GameTable, rule: DeviationRule) -> list[CoalitionStructure]:
    """Structures from which no allowed set profitably deviates.

    A deviation is profitable when every mover gains strictly more than
    eta; target payoffs come from the game table of the structure the
    deviation produces.
    """
    stable = []
    for cs in game.structures:
        z = game.payoffs[cs.canonical_key]
        unstable = False
        for movers in _deviating_sets(game, rule):
            target = _after_deviation(cs, movers)
            if target.canonical_key == cs.canonical_key:
                continue
            z_new = game.payoffs[target.canonical_key]
            if all(z_new[a] > z[a] + rule.eta for a in movers):
                unstable = True
                break
        if not unstable:
            stable.append(cs)
    return stable
