"""Game analysis on hand-built tables mirroring the published three-agent
games, plus structural properties on random games."""

import itertools

import numpy as np
import pytest

from cpareto.coalitions import AgentSet, Coalition, CoalitionStructure, enumerate_structures, is_refinement
from cpareto.errors import EmptyArchive, TooFewAgents
from cpareto.games import (
    DeviationClass,
    DeviationRule,
    ExternalityClass,
    GameTable,
    build_game,
    classify,
    externalities,
    social_welfare,
    stable_structures,
)
from cpareto.pareto import FavorAgent, ObjectivePoint, ParetoArchive, UtopiaWeighted


def table_from_payoffs(n, payoffs_by_key):
    agents = AgentSet(n)
    structures = tuple(enumerate_structures(agents))
    selected, payoffs = {}, {}
    for cs in structures:
        z = np.asarray(payoffs_by_key[cs.canonical_key], dtype=float)
        payoffs[cs.canonical_key] = z
        selected[cs.canonical_key] = ObjectivePoint(
            decision=z.copy(), agent_values=z.copy(), feasible=True,
            max_constraint_violation=0.0,
        )
    return GameTable(
        agents=agents, gamma=(1.0,) * n, structures=structures,
        selected=selected, payoffs=payoffs,
    )


# the published three-agent groundwater games, keyed by structure
NEGATIVE_GAME = {
    "{1,2,3}": (891, 927, 927),
    "{1,2}|{3}": (908, 941, 865),
    "{1,3}|{2}": (908, 865, 941),
    "{1}|{2,3}": (833, 942, 942),
    "{1}|{2}|{3}": (891, 927, 927),
}
MIXED_GAME = {
    "{1,2,3}": (891, 927, 927),
    "{1,2}|{3}": (1014, 1031, 449),
    "{1,3}|{2}": (891, 927, 927),
    "{1}|{2,3}": (891, 927, 927),
    "{1}|{2}|{3}": (1025, 1040, 400),
}
ZERO_GAME = {
    "{1,2,3}": (891, 927, 927),
    "{1,2}|{3}": (1025, 1040, 400),
    "{1,3}|{2}": (1025, 400, 1040),
    "{1}|{2,3}": (1232, 400, 400),
    "{1}|{2}|{3}": (1232, 400, 400),
}


class TestExternalities:
    def test_three_agents_have_three_records(self):
        recs = externalities(table_from_payoffs(3, NEGATIVE_GAME))
        assert len(recs) == 3

    def test_mixed_game_signs(self):
        recs = externalities(table_from_payoffs(3, MIXED_GAME))
        by_coalition = {r.coalition.key(): r.value for r in recs}
        assert by_coalition["{1}"] == pytest.approx(891 - 1025)
        assert by_coalition["{2}"] == pytest.approx(927 - 1040)
        assert by_coalition["{3}"] == pytest.approx(449 - 400)

    def test_zero_game_all_zero(self):
        recs = externalities(table_from_payoffs(3, ZERO_GAME))
        assert all(r.value == 0 for r in recs)

    def test_too_few_agents(self):
        game = table_from_payoffs(2, {"{1,2}": (1, 1), "{1}|{2}": (1, 1)})
        with pytest.raises(TooFewAgents):
            externalities(game)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_record_count_matches_exhaustive_oracle(self, n):
        rng = np.random.default_rng(n)
        structures = enumerate_structures(AgentSet(n))
        payoffs = {cs.canonical_key: rng.random(n) for cs in structures}
        game = table_from_payoffs(n, payoffs)
        recs = externalities(game)
        # oracle: all (C, coarse, fine) with fine a one-merge refinement
        # of coarse, C common to both, merge happening outside C
        count = 0
        for fine in structures:
            for coarse in structures:
                if len(coarse.coalitions) != len(fine.coalitions) - 1:
                    continue
                if not is_refinement(fine, coarse):
                    continue
                shared = set(c.members for c in fine.coalitions) & set(
                    c.members for c in coarse.coalitions
                )
                # the merge is outside C for every shared coalition C
                count += len(shared)
        assert len(recs) == count

    def test_records_have_one_merge_shape(self):
        recs = externalities(table_from_payoffs(3, NEGATIVE_GAME))
        for r in recs:
            assert len(r.coarse.coalitions) == len(r.fine.coalitions) - 1
            assert is_refinement(r.fine, r.coarse)
            assert r.coalition.members in {c.members for c in r.coarse.coalitions}
            assert r.coalition.members in {c.members for c in r.fine.coalitions}


class TestClassify:
    def test_negative_game(self):
        recs = externalities(table_from_payoffs(3, NEGATIVE_GAME))
        assert classify(recs) is ExternalityClass.NEGATIVE

    def test_mixed_game(self):
        recs = externalities(table_from_payoffs(3, MIXED_GAME))
        assert classify(recs) is ExternalityClass.MIXED

    def test_zero_game(self):
        recs = externalities(table_from_payoffs(3, ZERO_GAME))
        assert classify(recs) is ExternalityClass.ZERO

    def test_positive_class_reachable(self):
        game = table_from_payoffs(3, {
            "{1,2,3}": (1, 1, 1),
            "{1,2}|{3}": (1, 1, 5),
            "{1,3}|{2}": (1, 5, 1),
            "{1}|{2,3}": (5, 1, 1),
            "{1}|{2}|{3}": (1, 1, 1),
        })
        assert classify(externalities(game)) is ExternalityClass.POSITIVE

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(17)
        structures = enumerate_structures(AgentSet(4))
        payoffs = {cs.canonical_key: rng.random(4) * 100 for cs in structures}
        game = table_from_payoffs(4, payoffs)
        perm = [2, 0, 3, 1]
        permuted = {}
        for cs in structures:
            parts = [tuple(sorted(perm[a] for a in c.members)) for c in cs.coalitions]
            new_key = CoalitionStructure.from_sets(4, parts).canonical_key
            z = payoffs[cs.canonical_key]
            znew = np.empty(4)
            for a in range(4):
                znew[perm[a]] = z[a]
            permuted[new_key] = znew
        game2 = table_from_payoffs(4, permuted)
        assert classify(externalities(game)) is classify(externalities(game2))


class TestWelfare:
    def test_mixed_game_argmax(self):
        game = table_from_payoffs(3, MIXED_GAME)
        welfare, argmax = social_welfare(game)
        assert welfare["{1,2,3}"] == pytest.approx(2745)
        keys = {cs.canonical_key for cs in argmax}
        assert keys == {"{1,2,3}", "{1,3}|{2}", "{1}|{2,3}"}

    def test_zero_game_argmax_is_grand(self):
        _, argmax = social_welfare(table_from_payoffs(3, ZERO_GAME))
        assert {cs.canonical_key for cs in argmax} == {"{1,2,3}"}

    def test_efficiency_sums_exactly(self):
        game = table_from_payoffs(3, NEGATIVE_GAME)
        for cs in game.structures:
            for c in cs.coalitions:
                w = game.value(c, cs)
                assert w == sum(float(game.payoffs[cs.canonical_key][a]) for a in c.members)


class TestStability:
    RULE = DeviationRule(
        classes=frozenset({DeviationClass.SINGLE_EXIT, DeviationClass.PAIR_EXIT}),
        eta=1.0,
    )

    def test_negative_game_core(self):
        stable = stable_structures(table_from_payoffs(3, NEGATIVE_GAME), self.RULE)
        assert {cs.canonical_key for cs in stable} == {
            "{1,2}|{3}", "{1,3}|{2}", "{1}|{2,3}",
        }

    def test_mixed_game_core_is_singletons(self):
        stable = stable_structures(table_from_payoffs(3, MIXED_GAME), self.RULE)
        assert {cs.canonical_key for cs in stable} == {"{1}|{2}|{3}"}

    def test_one_agent_game_is_stable(self):
        game = table_from_payoffs(1, {"{1}": (7.0,)})
        stable = stable_structures(game, DeviationRule())
        assert len(stable) == 1

    def test_margin_suppresses_marginal_deviations(self):
        # without the margin, the +1 pair deviation breaks the pair structures
        loose = DeviationRule(classes=self.RULE.classes, eta=0.0)
        stable = stable_structures(table_from_payoffs(3, NEGATIVE_GAME), loose)
        assert "{1,2}|{3}" not in {cs.canonical_key for cs in stable}

    def test_subset_exit_catches_triple_deviations(self):
        # all three agents jointly move from singletons to the grand coalition
        game = table_from_payoffs(3, {
            "{1,2,3}": (10, 10, 10),
            "{1,2}|{3}": (1, 1, 1),
            "{1,3}|{2}": (1, 1, 1),
            "{1}|{2,3}": (1, 1, 1),
            "{1}|{2}|{3}": (1, 1, 1),
        })
        pairs_only = stable_structures(game, self.RULE)
        assert "{1}|{2}|{3}" in {cs.canonical_key for cs in pairs_only}
        subset_rule = DeviationRule(classes=frozenset({DeviationClass.SUBSET_EXIT}), eta=0.0)
        stable = stable_structures(game, subset_rule)
        assert {cs.canonical_key for cs in stable} == {"{1,2,3}"}

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            DeviationRule(classes=frozenset())
        with pytest.raises(ValueError):
            DeviationRule(eta=-1.0)


class TestWelfarePointGame:
    def test_welfare_selection_makes_a_flat_game(self, tc1_archives, tc1_scenario):
        # picking the max-total point in every archive yields the same
        # welfare in every structure, equal to the grand-coalition value
        import numpy as np

        totals = {}
        for key, archive in tc1_archives.items():
            sums = (archive.agent_matrix() * archive.gamma).sum(axis=1)
            totals[key] = float(sums.max())
        grand = totals["{1,2,3}"]
        for key, value in totals.items():
            assert value == pytest.approx(grand, rel=1e-9), key


class TestBuildGame:
    def _archives(self, rows_by_key, n=3):
        agents = AgentSet(n)
        out = {}
        for cs in enumerate_structures(agents):
            rows = rows_by_key[cs.canonical_key]
            out[cs.canonical_key] = ParetoArchive.from_points(
                cs, (1.0,) * n,
                [
                    ObjectivePoint(
                        decision=np.asarray(r, dtype=float),
                        agent_values=np.asarray(r, dtype=float),
                        feasible=True, max_constraint_violation=0.0,
                    )
                    for r in rows
                ],
            )
        return out

    def test_selects_per_structure_and_fills_payoffs(self):
        rows = {
            "{1,2,3}": [(3, 3, 3)],
            "{1,2}|{3}": [(4, 4, 1), (1, 1, 6)],
            "{1,3}|{2}": [(4, 1, 4), (1, 6, 1)],
            "{1}|{2,3}": [(6, 1, 1), (1, 4, 4)],
            "{1}|{2}|{3}": [(3, 3, 3), (5, 2, 2)],
        }
        archives = self._archives(rows)
        game = build_game(archives, FavorAgent(0), AgentSet(3))
        assert game.payoffs["{1}|{2,3}"].tolist() == [6.0, 1.0, 1.0]
        grand = CoalitionStructure.grand(3)
        assert game.value(grand.coalitions[0], grand) == 9.0

    def test_single_point_archives_agree_across_criteria(self):
        rows = {k: [(2, 3, 4)] for k in (
            "{1,2,3}", "{1,2}|{3}", "{1,3}|{2}", "{1}|{2,3}", "{1}|{2}|{3}",
        )}
        archives = self._archives(rows)
        g1 = build_game(archives, UtopiaWeighted((0.2, 0.3, 0.5), 2.0), AgentSet(3))
        g2 = build_game(archives, FavorAgent(2), AgentSet(3))
        for key in rows:
            assert (g1.payoffs[key] == g2.payoffs[key]).all()

    def test_missing_archive_rejected(self):
        rows = {"{1,2,3}": [(1, 1, 1)]}
        archives = self._archives({**{
            k: [(1, 1, 1)] for k in (
                "{1,2,3}", "{1,2}|{3}", "{1,3}|{2}", "{1}|{2,3}", "{1}|{2}|{3}",
            )
        }})
        del archives["{1}|{2,3}"]
        with pytest.raises(EmptyArchive):
            build_game(archives, FavorAgent(0), AgentSet(3))

    def test_rounded_table_keeps_efficiency(self):
        rows = {k: [(1.4, 2.6, 3.5)] for k in (
            "{1,2,3}", "{1,2}|{3}", "{1,3}|{2}", "{1}|{2,3}", "{1}|{2}|{3}",
        )}
        game = build_game(self._archives(rows), FavorAgent(0), AgentSet(3))
        rounded = game.rounded(0)
        grand = CoalitionStructure.grand(3)
        z = rounded.payoffs["{1,2,3}"]
        assert rounded.value(grand.coalitions[0], grand) == z.sum()
