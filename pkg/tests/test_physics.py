import math
from dataclasses import replace

import numpy as np
import pytest

from cpareto.coalitions import AgentSet, CoalitionStructure
from cpareto.errors import EvaluationAtWellCenter, LengthMismatch, NonPositiveArgument
from cpareto.evomoo import EvoConfig, nsga2
from cpareto.fixtures import load_fixture
from cpareto.oracles import e1_series, grid_front_oracle
from cpareto.physics import (
    Evaluator,
    NonlinearProxyModel,
    Q_VOL,
    Scenario,
    Well,
    YEAR_SECONDS,
    agent_objectives,
    assemble_linear,
    evaluate_constraints,
    head_at_well,
    head_change,
    scenario_from_dict,
    scenario_to_dict,
    well_function,
)


class TestWellFunction:
    def test_at_one(self):
        assert well_function(1.0) == pytest.approx(0.2193839, abs=5e-8)

    def test_at_tenth(self):
        assert well_function(0.1) == pytest.approx(1.8229240, abs=5e-8)

    def test_vanishes_for_large_argument(self):
        assert well_function(50.0) < 1e-23

    def test_nonpositive_argument_rejected(self):
        with pytest.raises(NonPositiveArgument):
            well_function(0.0)

    @pytest.mark.parametrize("chi", np.logspace(-8, 1.5, 50))
    def test_against_series_oracle(self, chi):
        assert well_function(chi) == pytest.approx(e1_series(chi), rel=1e-10)


def single_well_scenario(dt, n_t=1, r_well=0.2):
    return Scenario(
        name="one-well", agents=AgentSet(1), wells=(Well(0.0, 0.0, 0),),
        n_t=n_t, dt=dt, storage=1e-5, transmissivity=1e-3,
        q_min=0.0, q_max=1e9, h_crit=1e9, r_well=r_well,
    )


class TestHeadChange:
    def test_single_well_example(self):
        # 0.1 m3/s at r = 100 m after one year: chi ~ 7.92e-7, W ~ 13.47
        t = 3.156e7
        sc = single_well_scenario(dt=t)
        rate = 0.1 / Q_VOL  # scenario units giving exactly 0.1 m3/s
        h = head_change(sc, np.array([[rate]]), 100.0, 0.0, t)
        chi = 1e-5 * 100.0**2 / (4 * 1e-3 * t)
        expected = 0.1 / (4 * math.pi * 1e-3) * e1_series(chi)
        assert h == pytest.approx(expected, rel=1e-10)
        assert h == pytest.approx(107.2, abs=0.05)

    def test_equal_consecutive_intervals_telescope(self):
        sc = single_well_scenario(dt=YEAR_SECONDS, n_t=2)
        t = 1.7 * YEAR_SECONDS
        h_two = head_change(sc, np.array([[5.0, 5.0]]), 50.0, 0.0, t)
        sc_one = single_well_scenario(dt=2 * YEAR_SECONDS, n_t=1)
        h_one = head_change(sc_one, np.array([[5.0]]), 50.0, 0.0, t)
        assert h_two == pytest.approx(h_one, rel=1e-12)

    def test_zero_rates_give_zero_head(self):
        sc = single_well_scenario(dt=YEAR_SECONDS, n_t=3)
        assert head_change(sc, np.zeros((1, 3)), 123.0, 45.0, 2 * YEAR_SECONDS) == 0.0

    def test_well_center_rejected(self):
        sc = single_well_scenario(dt=YEAR_SECONDS)
        with pytest.raises(EvaluationAtWellCenter):
            head_change(sc, np.ones((1, 1)), 0.0, 0.0, YEAR_SECONDS)

    def test_linearity(self):
        sc = load_fixture("testcase1")
        rng = np.random.default_rng(7)
        r1 = rng.random((3, 10)) * 100
        r2 = rng.random((3, 10)) * 100
        alpha = 1.73
        t = 6.5 * YEAR_SECONDS
        h = head_change(sc, alpha * r1 + r2, 4000.0, 4000.0, t)
        h1 = head_change(sc, r1, 4000.0, 4000.0, t)
        h2 = head_change(sc, r2, 4000.0, 4000.0, t)
        assert h == pytest.approx(alpha * h1 + h2, rel=1e-10)


class TestAssembleLinear:
    def test_dimensions_three_wells_ten_intervals(self):
        system = assemble_linear(load_fixture("testcase1"))
        assert system.B.shape == (30, 30)
        assert (system.b == 10000.0).all()

    def test_single_term_entry(self):
        sc = single_well_scenario(dt=YEAR_SECONDS, r_well=0.3)
        system = assemble_linear(sc)
        chi = 1e-5 * 0.3**2 / (4 * 1e-3 * YEAR_SECONDS)
        expected = Q_VOL * well_function(chi) / (4 * math.pi * 1e-3)
        assert system.B.shape == (1, 1)
        assert system.B[0, 0] == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_matvec_matches_direct_heads(self, seed):
        sc = load_fixture("testcase1")
        system = assemble_linear(sc)
        rng = np.random.default_rng(seed)
        for _ in range(5):
            q = rng.uniform(40, 150, size=30)
            heads = system.B @ q
            rates = sc.pad_rates(q)
            for i in range(1, sc.n_t + 1):
                for j in range(sc.n_wells):
                    direct = head_at_well(sc, rates, j, i * sc.dt)
                    assert heads[(i - 1) * sc.n_wells + j] == pytest.approx(direct, rel=1e-8)

    def test_all_coefficients_positive(self):
        # raising any interval rate raises every later head
        system = assemble_linear(load_fixture("testcase1"))
        mask = system.B != 0.0
        assert (system.B[mask] > 0).all()

    def test_final_interval_raise_never_decreases_heads(self):
        sc = load_fixture("testcase1")
        system = assemble_linear(sc)
        rng = np.random.default_rng(1)
        q = rng.uniform(40, 150, size=30)
        bumped = q.copy()
        bumped[9] += 5.0  # well 0, final interval
        assert ((system.B @ bumped) >= (system.B @ q) - 1e-12).all()


class TestObjectivesAndConstraints:
    def test_table_value_arithmetic(self):
        sc = load_fixture("testcase1")
        q = np.full(30, 89.1)
        vals = agent_objectives(sc, q)
        assert vals[0] == pytest.approx(891.0, rel=1e-12)

    def test_zero_rates_zero_objectives(self):
        sc = load_fixture("testcase1")
        assert agent_objectives(sc, np.zeros(30)).tolist() == [0.0, 0.0, 0.0]

    def test_disjoint_wells_are_additive(self):
        sc = load_fixture("testcase1")
        rng = np.random.default_rng(0)
        q1, q2 = rng.random(30), rng.random(30)
        both = q1.copy()
        both[10:] = q2[10:]  # wells of a2, a3 from the second schedule
        vals = agent_objectives(sc, both)
        assert vals[0] == pytest.approx(agent_objectives(sc, q1)[0])
        assert vals[1:] == pytest.approx(agent_objectives(sc, q2)[1:])

    def test_minimum_rates_feasible_on_testcase1(self):
        sc = load_fixture("testcase1")
        system = assemble_linear(sc)
        viol, worst = evaluate_constraints(sc, system, np.full(30, 40.0))
        assert worst == 0.0

    def test_rate_above_maximum_flagged(self):
        sc = load_fixture("testcase1")
        system = assemble_linear(sc)
        q = np.full(30, 40.0)
        q[3] = 151.0
        _, worst = evaluate_constraints(sc, system, q)
        assert worst > 0

    def test_proxy_at_zero_rates(self):
        sc = load_fixture("proxy_small")
        viol, worst = evaluate_constraints(sc, sc.proxy, np.zeros(sc.n_dv))
        assert viol.max() == 0.0  # pressure part silent
        assert worst == pytest.approx(0.24)  # the minimum-rate bound bites

    def test_length_mismatch(self):
        sc = load_fixture("testcase1")
        with pytest.raises(LengthMismatch):
            agent_objectives(sc, np.zeros(7))


class TestSymmetry:
    def test_square_symmetry_permutes_objectives(self):
        sc = load_fixture("testcase2")
        rng = np.random.default_rng(5)
        q = rng.uniform(40, 150, size=20)
        # reflection across the diagonal swaps wells 1 and 2 (agents a2, a3)
        perm = [0, 2, 1, 3]
        qp = q.reshape(4, 5)[perm].ravel()
        vals = agent_objectives(sc, q)
        valsp = agent_objectives(sc, qp)
        assert valsp == pytest.approx(vals[perm])
        system = assemble_linear(sc)
        worst = np.max(system.B @ q - system.b)
        worstp = np.max(system.B @ qp - system.b)
        assert worst == pytest.approx(worstp, rel=1e-9)


class TestOffsets:
    def test_decision_count_excludes_prestart_intervals(self):
        sc = load_fixture("proxy_offsets")
        assert sc.n_dv == 70  # 9 wells x 8 intervals minus two delayed starts

    def test_prestart_intervals_carry_zero_rate(self):
        sc = load_fixture("proxy_offsets")
        q = np.full(sc.n_dv, 3.0)
        rates = sc.pad_rates(q)
        assert rates[0, 0] == 0.0 and rates[3, 0] == 0.0
        assert rates[1, 0] == 3.0

    def test_objectives_skip_prestart(self):
        sc = load_fixture("proxy_offsets")
        q = np.full(sc.n_dv, 1.0)
        vals = agent_objectives(sc, q)
        # agent 1 runs wells 1-4 with wells 1 and 4 one interval short
        assert vals[0] == pytest.approx((8 + 7 + 8 + 7) * 5.0)
        assert vals[1] == pytest.approx(3 * 8 * 5.0)
        assert vals[2] == pytest.approx(2 * 8 * 5.0)


class TestScenarioRoundTrip:
    @pytest.mark.parametrize("name", ["testcase1", "proxy_offsets"])
    def test_dict_round_trip(self, name):
        sc = load_fixture(name)
        sc2 = scenario_from_dict(scenario_to_dict(sc))
        assert scenario_to_dict(sc) == scenario_to_dict(sc2)


class TestProxyNonConvexity:
    """The bundled proxy has a genuinely non-convex front: a plain
    weighted-sum sweep provably misses regions that the evolutionary
    front search covers."""

    RES = 31
    WEIGHT_RES = 60

    def _wsm_attained(self, sc):
        ax = np.linspace(sc.q_min, sc.q_max, self.RES)
        grids = np.meshgrid(*([ax] * sc.n_dv), indexing="ij")
        Q = np.stack([m.ravel() for m in grids], axis=1)
        ev = Evaluator(sc)
        vals, viol = ev.evaluate(Q)
        F = vals[viol <= ev.feas_tol]
        ws = []
        m = self.WEIGHT_RES
        for i in range(m + 1):
            for j in range(m + 1 - i):
                w = np.maximum(np.array([i, j, m - i - j], float) / m, 1e-3)
                ws.append(w / w.sum())
        return F[np.unique((F @ np.array(ws).T).argmax(axis=0))]

    def _mixture_margin(self, attained, y):
        """Best t with some convex mixture of attained points >= y + t.

        Positive beyond the grid sag means y lies in a dent: no weighted
        sum, at any weight resolution, can reach it.
        """
        from cpareto.lpsolve import LinearProgram, LPStatus, solve_lp

        nb = len(attained)
        B = np.zeros((5, nb + 1))
        b = np.zeros(5)
        B[:3, :nb] = -attained.T
        B[:3, nb] = 1.0
        b[:3] = -y
        B[3, :nb] = 1.0
        b[3] = 1.0
        B[4, :nb] = -1.0
        b[4] = -1.0
        c = np.zeros(nb + 1)
        c[nb] = 1.0
        res = solve_lp(LinearProgram(
            c=c, B=B, b=b,
            lo=np.concatenate([np.zeros(nb), [-1e9]]),
            hi=np.concatenate([np.ones(nb), [1e9]]),
        ))
        assert res.status is LPStatus.OPTIMAL
        return res.value

    def _missed_by_wsm(self, sc):
        attained = self._wsm_attained(sc)
        arch = nsga2(
            Evaluator(sc),
            CoalitionStructure.singletons(3),
            EvoConfig(pop_size=60, generations=40, seed=0, cso_pop_size=40, cso_generations=30),
        )
        N = arch.coalition_matrix()
        spacing = (sc.q_max - sc.q_min) / (self.RES - 1) * sc.dt_years * sc.n_t
        missed = 0
        for y in N:
            if self._mixture_margin(attained, y) > 3 * spacing:
                missed += 1
        return missed, len(N)

    def test_wsm_misses_nsga2_points_on_the_tiny_proxy(self):
        missed, total = self._missed_by_wsm(load_fixture("proxy_tiny"))
        assert missed >= 1
        assert missed > total // 4  # the dent is macroscopic, not a numeric fluke

    def test_convex_control_is_fully_covered(self):
        tiny = load_fixture("proxy_tiny")
        A = np.array(tiny.proxy.interference)
        A[0, 1] = A[1, 0] = abs(A[0, 1])
        control = replace(
            tiny, proxy=NonlinearProxyModel(A, 2.0, 1.0), h_crit=1100.0
        )
        missed, _ = self._missed_by_wsm(control)
        assert missed == 0


class TestGridOracle:
    def test_toy_line_front(self):
        # q1 + q2 <= 1 via a symmetric two-well linear scenario
        sc = Scenario(
            name="toy", agents=AgentSet(2),
            wells=(Well(0.0, 0.0, 0), Well(1.0, 0.0, 1)),
            n_t=1, dt=YEAR_SECONDS, storage=1e-5, transmissivity=1e-3,
            q_min=0.0, q_max=200.0, h_crit=5000.0, r_well=1.0,
        )
        ev = Evaluator(sc)
        mesh, objs = grid_front_oracle(ev, np.eye(2) * sc.dt_years, 101)
        sums = mesh.sum(axis=1)
        binding = sums[sums > 1.0]
        assert binding.std() < 0.02 * binding.mean()  # front is the line q1+q2 = c
