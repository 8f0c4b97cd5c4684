import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpareto.coalitions import (
    AgentSet,
    Coalition,
    CoalitionStructure,
    aggregation_map,
    build_graph,
    coarsenings_of,
    enumerate_structures,
    is_refinement,
)
from cpareto.errors import AgentCountTooLarge, MismatchedAgentSets, UnknownStructure
from cpareto.oracles import bell_triangle, split_edges


def cs(n, *parts):
    return CoalitionStructure.from_sets(n, parts)


class TestEnumeration:
    def test_single_agent(self):
        out = enumerate_structures(AgentSet(1))
        assert len(out) == 1
        assert out[0].canonical_key == "{1}"

    def test_three_agents_has_five_structures(self):
        assert len(enumerate_structures(AgentSet(3))) == 5

    def test_four_agents_has_fifteen_structures(self):
        assert len(enumerate_structures(AgentSet(4))) == 15

    @pytest.mark.parametrize("n", range(1, 9))
    def test_counts_match_bell_triangle(self, n):
        assert len(enumerate_structures(AgentSet(n))) == bell_triangle(n)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_every_structure_partitions_the_agents(self, n):
        for s in enumerate_structures(AgentSet(n)):
            members = sorted(a for c in s.coalitions for a in c.members)
            assert members == list(range(n))

    def test_no_duplicates_and_deterministic_order(self):
        out = enumerate_structures(AgentSet(5))
        keys = [s.canonical_key for s in out]
        assert len(set(keys)) == len(keys)
        assert keys == sorted(keys, key=lambda k: (k.count("|"), k))
        assert out == enumerate_structures(AgentSet(5))

    def test_cap_on_agent_count(self):
        with pytest.raises(AgentCountTooLarge):
            enumerate_structures(AgentSet(13))

    def test_canonical_key_is_min_member_sorted(self):
        s = cs(4, (3, 1), (2, 0))
        assert s.canonical_key == "{1,3}|{2,4}"
        assert CoalitionStructure.from_key(4, "{1,3}|{2,4}") == s


class TestRefinement:
    def test_singletons_refine_pairs(self):
        fine = cs(4, (0,), (1,), (2,), (3,))
        coarse = cs(4, (0, 2), (1, 3))
        assert is_refinement(fine, coarse)

    def test_reflexive(self):
        s = cs(3, (0, 1), (2,))
        assert is_refinement(s, s)

    def test_crossing_partitions_do_not_refine(self):
        assert not is_refinement(cs(3, (0, 1), (2,)), cs(3, (0, 2), (1,)))

    def test_mismatched_agent_sets_rejected(self):
        with pytest.raises(MismatchedAgentSets):
            is_refinement(cs(3, (0,), (1,), (2,)), cs(2, (0,), (1,)))

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_partial_order(self, data):
        n = data.draw(st.integers(2, 6))
        structures = enumerate_structures(AgentSet(n))
        a = data.draw(st.sampled_from(structures))
        b = data.draw(st.sampled_from(structures))
        c = data.draw(st.sampled_from(structures))
        assert is_refinement(a, a)
        if is_refinement(a, b) and is_refinement(b, a):
            assert a.canonical_key == b.canonical_key
        if is_refinement(a, b) and is_refinement(b, c):
            assert is_refinement(a, c)

    def test_brute_force_union_oracle(self):
        # every coalition of the coarse side must be a union of fine ones
        fine = cs(4, (0, 1), (2,), (3,))
        coarse = cs(4, (0, 1), (2, 3))
        for f, c in [(fine, coarse), (coarse, fine)]:
            expected = all(
                any(
                    set(cc.members)
                    == set().union(*(set(x.members) for x in combo))
                    for r in range(1, len(f.coalitions) + 1)
                    for combo in _subsets(f.coalitions, r)
                )
                for cc in c.coalitions
            )
            assert is_refinement(f, c) == expected


def _subsets(items, r):
    import itertools

    return itertools.combinations(items, r)


class TestGraph:
    def test_three_agents_six_edges(self):
        g = build_graph(AgentSet(3))
        assert len(g.edges) == 6

    def test_two_agents_one_edge(self):
        g = build_graph(AgentSet(2))
        assert len(g.edges) == 1

    def test_every_two_coalition_node_adjacent_to_grand(self):
        g = build_graph(AgentSet(4))
        grand = CoalitionStructure.grand(4).canonical_key
        twos = [cs.canonical_key for cs in g.nodes if cs.level == 2]
        for key in twos:
            assert (grand, key) in g.edges

    @pytest.mark.parametrize("n", range(2, 6))
    def test_edges_match_split_enumeration_oracle(self, n):
        g = build_graph(AgentSet(n))
        assert set(g.edges) == split_edges(g.nodes)

    @pytest.mark.parametrize("n", range(2, 6))
    def test_edges_connect_adjacent_levels_only(self, n):
        g = build_graph(AgentSet(n))
        level = {cs.canonical_key: cs.level for cs in g.nodes}
        for coarse, fine in g.edges:
            assert level[fine] == level[coarse] + 1


class TestCoarsenings:
    def test_grand_has_no_coarsening(self):
        g = build_graph(AgentSet(3))
        assert coarsenings_of(CoalitionStructure.grand(3), g) == []

    def test_known_coarsening_present(self):
        g = build_graph(AgentSet(4))
        target = cs(4, (0, 2), (1,), (3,))
        keys = {c.canonical_key for c in coarsenings_of(target, g)}
        assert "{1,3}|{2,4}" in keys

    def test_singletons_coarsen_to_everything_else(self):
        g = build_graph(AgentSet(3))
        out = coarsenings_of(CoalitionStructure.singletons(3), g)
        assert len(out) == 4

    def test_unknown_structure_rejected(self):
        g = build_graph(AgentSet(3))
        with pytest.raises(UnknownStructure):
            coarsenings_of(cs(4, (0, 1, 2, 3)), g)


class TestAggregationMap:
    def test_pair_and_singleton(self):
        m = aggregation_map(cs(3, (0, 1), (2,)))
        assert m.tolist() == [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

    def test_singleton_structure_gives_identity(self):
        m = aggregation_map(CoalitionStructure.singletons(4))
        assert (m == [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]).all()

    def test_grand_gives_all_ones_row(self):
        m = aggregation_map(CoalitionStructure.grand(3))
        assert m.tolist() == [[1.0, 1.0, 1.0]]

    @pytest.mark.parametrize("n", range(1, 6))
    def test_each_column_sums_to_one(self, n):
        for s in enumerate_structures(AgentSet(n)):
            assert (aggregation_map(s).sum(axis=0) == 1).all()


class TestValidation:
    def test_empty_coalition_rejected(self):
        with pytest.raises(ValueError):
            Coalition(())

    def test_overlapping_coalitions_rejected(self):
        with pytest.raises(ValueError):
            cs(3, (0, 1), (1, 2))

    def test_incomplete_cover_rejected(self):
        with pytest.raises(ValueError):
            cs(3, (0, 1))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            AgentSet(2, ("x", "x"))

    def test_default_labels(self):
        assert AgentSet(3).labels == ("a1", "a2", "a3")
