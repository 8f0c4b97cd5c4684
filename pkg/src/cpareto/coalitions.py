"""Agents, coalitions, coalition structures and the structure graph.

A coalition structure is a partition of the agent index set.  Structures
are kept in a canonical form (members sorted inside each coalition,
coalitions sorted by their smallest member) so that equality of
partitions is equality of their text keys.  The canonical text encoding
uses 1-based agent numbers, e.g. ``"{1,3}|{2,4}"``, and is the key used
in JSON exports and on the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AgentCountTooLarge, MismatchedAgentSets, UnknownStructure

MAX_AGENTS = 12  # Bell(12) = 4,213,597 structures; enumeration stays in memory


@dataclass(frozen=True)
class AgentSet:
    """The fixed set of agents, identified by index 0..n_agents-1."""

    n_agents: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("need at least one agent")
        labels = self.labels or tuple(f"a{i + 1}" for i in range(self.n_agents))
        if len(labels) != self.n_agents or len(set(labels)) != self.n_agents:
            raise ValueError("labels must be distinct, one per agent")
        object.__setattr__(self, "labels", tuple(labels))


@dataclass(frozen=True)
class Coalition:
    """A nonempty set of agent indices, stored sorted."""

    members: tuple[int, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("coalition must be nonempty")
        object.__setattr__(self, "members", tuple(sorted(set(self.members))))

    def key(self) -> str:
        return "{" + ",".join(str(a + 1) for a in self.members) + "}"

    def __contains__(self, agent: int) -> bool:
        return agent in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CoalitionStructure:
    """A partition of 0..n_agents-1 into disjoint coalitions."""

    n_agents: int
    coalitions: tuple[Coalition, ...]
    canonical_key: str = field(init=False)

    def __post_init__(self):
        coals = tuple(
            sorted(
                (c if isinstance(c, Coalition) else Coalition(tuple(c)) for c in self.coalitions),
                key=lambda c: c.members[0],
            )
        )
        seen: list[int] = []
        for c in coals:
            seen.extend(c.members)
        if sorted(seen) != list(range(self.n_agents)):
            raise ValueError("coalitions must partition the agent set")
        object.__setattr__(self, "coalitions", coals)
        object.__setattr__(self, "canonical_key", "|".join(c.key() for c in coals))

    @classmethod
    def from_sets(cls, n_agents: int, parts: Iterable[Iterable[int]]) -> "CoalitionStructure":
        return cls(n_agents, tuple(Coalition(tuple(p)) for p in parts))

    @classmethod
    def from_key(cls, n_agents: int, key: str) -> "CoalitionStructure":
        """Parse the canonical text encoding (1-based members)."""
        parts = []
        for chunk in key.split("|"):
            chunk = chunk.strip()
            if not (chunk.startswith("{") and chunk.endswith("}")):
                raise ValueError(f"malformed structure key: {key!r}")
            parts.append(tuple(int(tok) - 1 for tok in chunk[1:-1].split(",")))
        return cls.from_sets(n_agents, parts)

    @classmethod
    def singletons(cls, n_agents: int) -> "CoalitionStructure":
        return cls.from_sets(n_agents, [(a,) for a in range(n_agents)])

    @classmethod
    def grand(cls, n_agents: int) -> "CoalitionStructure":
        return cls.from_sets(n_agents, [tuple(range(n_agents))])

    @property
    def level(self) -> int:
        return len(self.coalitions)

    def agent_to_coalition(self) -> tuple[int, ...]:
        """For each agent, the index of its coalition in this structure."""
        out = [0] * self.n_agents
        for i, c in enumerate(self.coalitions):
            for a in c.members:
                out[a] = i
        return tuple(out)

    def __len__(self) -> int:
        return len(self.coalitions)

    def __hash__(self) -> int:
        return hash((self.n_agents, self.canonical_key))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CoalitionStructure)
            and self.n_agents == other.n_agents
            and self.canonical_key == other.canonical_key
        )


@dataclass(frozen=True)
class CSGraph:
    """All structures over an agent set, with the one-split edge relation.

    Nodes are grouped by level |CS|; an edge joins a coarser structure to
    the finer one obtained by splitting exactly one of its coalitions in
    two.
    """

    agents: AgentSet
    nodes: tuple[CoalitionStructure, ...]
    edges: tuple[tuple[str, str], ...]  # (coarser key, finer key)

    def node_keys(self) -> tuple[str, ...]:
        return tuple(cs.canonical_key for cs in self.nodes)


def _check_count(n_agents: int) -> None:
    if n_agents < 1:
        raise ValueError("need at least one agent")
    if n_agents > MAX_AGENTS:
        raise AgentCountTooLarge(
            f"{n_agents} agents would give Bell({n_agents}) structures; cap is {MAX_AGENTS}"
        )


def enumerate_structures(agents: AgentSet) -> list[CoalitionStructure]:
    """All partitions of the agent set, canonical, ordered by (level, key).

    Uses restricted-growth strings: element i is assigned to block
    rgs[i] <= 1 + max(rgs[:i]).  The count equals the Bell number.
    """
    n = agents.n_agents
    _check_count(n)
    out: list[CoalitionStructure] = []
    rgs = [0] * n

    def rec(i: int, maxb: int, blocks: list[list[int]]):
        if i == n:
            out.append(CoalitionStructure.from_sets(n, [tuple(b) for b in blocks]))
            return
        for b in range(maxb + 1):
            blocks[b].append(i)
            rec(i + 1, maxb, blocks)
            blocks[b].pop()
        blocks.append([i])
        rec(i + 1, maxb + 1, blocks)
        blocks.pop()

    rec(1, 0, [[0]]) if n > 1 else out.append(CoalitionStructure.grand(1))
    out.sort(key=lambda cs: (cs.level, cs.canonical_key))
    return out


def is_refinement(fine: CoalitionStructure, coarse: CoalitionStructure) -> bool:
    """True iff every coalition of ``coarse`` is a union of coalitions of ``fine``.

    Reflexive: a structure refines itself.
    """
    if fine.n_agents != coarse.n_agents:
        raise MismatchedAgentSets("structures are over different agent sets")
    owner = coarse.agent_to_coalition()
    for c in fine.coalitions:
        first = owner[c.members[0]]
        if any(owner[a] != first for a in c.members[1:]):
            return False
    return True


def build_graph(agents: AgentSet) -> CSGraph:
    """The coalition structure graph (levels + one-split edges).

    Edges are generated from the finer side: merging any two coalitions
    of a structure yields its one-split coarsening.
    """
    nodes = enumerate_structures(agents)
    by_key = {cs.canonical_key for cs in nodes}
    edges: list[tuple[str, str]] = []
    for cs in nodes:
        k = len(cs.coalitions)
        if k < 2:
            continue
        for i in range(k):
            for j in range(i + 1, k):
                merged = [c.members for idx, c in enumerate(cs.coalitions) if idx not in (i, j)]
                merged.append(cs.coalitions[i].members + cs.coalitions[j].members)
                coarser = CoalitionStructure.from_sets(cs.n_agents, merged)
                assert coarser.canonical_key in by_key
                edges.append((coarser.canonical_key, cs.canonical_key))
    edges.sort()
    return CSGraph(agents=agents, nodes=tuple(nodes), edges=tuple(edges))


def coarsenings_of(cs: CoalitionStructure, graph: CSGraph) -> list[CoalitionStructure]:
    """All structures strictly coarser than ``cs`` (reachable by merging).

    Brute-force refinement checks over the whole graph; the node count is
    small at the supported agent counts.
    """
    if cs.canonical_key not in set(graph.node_keys()):
        raise UnknownStructure(cs.canonical_key)
    return [
        other
        for other in graph.nodes
        if other.canonical_key != cs.canonical_key and is_refinement(cs, other)
    ]


def aggregation_map(cs: CoalitionStructure) -> np.ndarray:
    """0/1 matrix with |CS| rows and one column per agent.

    Row i selects the members of the i-th coalition; every column has
    exactly one 1.
    """
    m = np.zeros((len(cs.coalitions), cs.n_agents))
    for i, c in enumerate(cs.coalitions):
        for a in c.members:
            m[i, a] = 1.0
    return m
