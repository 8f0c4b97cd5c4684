"""Scenario definition and constraint/objective evaluation.

Two models are supported.  The linear one is the classical Theis
superposition response of a confined aquifer: the head change at a
point is a sum over wells and rate changes of exponential-integral
terms, which makes the head constraints an exact dense linear system in
the interval rates.  The nonlinear proxy replaces the aquifer response
with a synthetic per-interval pressure response (quadratic interference
plus a saturation term) whose feasible set is deliberately non-convex,
so that population-based optimizers face a front with unsupported
points.

Rates are carried in scenario units (Mm3/year or Mton/year) throughout;
conversion to m3/s happens only inside the Theis terms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coalitions import AgentSet
from .errors import (
    EvaluationAtWellCenter,
    LengthMismatch,
    NonPositiveArgument,
    ScenarioError,
)

YEAR_SECONDS = 365.25 * 86400.0
#: converts Mm3/year (or Mton/year) to m3/s inside the head kernel
Q_VOL = 1.0e6 / YEAR_SECONDS

EULER_GAMMA = 0.5772156649015328606

#: relative feasibility slack, consistent with the LP feasibility contract
FEAS_RTOL = 1e-7


def well_function(chi: float) -> float:
    """Theis well function W(chi), the exponential integral E1.

    Power series below 1, modified-Lentz continued fraction above;
    relative error <= 1e-10 over the positive axis.
    """
    if chi <= 0.0:
        raise NonPositiveArgument("well function argument must be positive")
    if chi < 1.0:
        total = -EULER_GAMMA - math.log(chi)
        term = 1.0
        for k in range(1, 60):
            term *= -chi / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
                break
        return total
    if chi > 700.0:
        return 0.0
    # continued fraction e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = chi + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, 200):
        a = -k * k
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return math.exp(-chi) * h


@dataclass(frozen=True)
class Well:
    x: float
    y: float
    agent: int
    start_offset: int = 0  # whole intervals skipped before injection starts


@dataclass(frozen=True)
class NonlinearProxyModel:
    """Synthetic per-interval pressure response standing in for a simulator.

    At well j and interval n, with interval rates q:

        g[j, n] = sum_k A[j, k] * q[k, n]**(s - 1) + kappa * (sum_k q[k, n])**s

    At s = 2 the interference term is linear in the rates and the
    feasible set is convex.  The bundled scenarios use an exponent
    between 1 and 2: concave interference makes the feasible set (and
    with it the front) non-convex, and one bounded negative off-diagonal
    pair in A (a pressure-relief coupling) deepens the effect while g
    stays positive over the whole rate box.
    """

    interference: np.ndarray
    saturation_exponent: float
    capacity_scale: float

    def __post_init__(self):
        A = np.asarray(self.interference, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ScenarioError("interference matrix must be square")
        if not np.allclose(A, A.T):
            raise ScenarioError("interference matrix must be symmetric")
        if self.saturation_exponent <= 1:
            raise ScenarioError("saturation exponent must exceed 1")
        if self.capacity_scale <= 0:
            raise ScenarioError("capacity scale must be positive")
        A.setflags(write=False)
        object.__setattr__(self, "interference", A)

    def pressure(self, rates: np.ndarray) -> np.ndarray:
        """(P, n_w, n_t) rate tensor -> (P, n_w, n_t) responses."""
        s = self.saturation_exponent
        lin = np.einsum("jk,pkn->pjn", self.interference, rates ** (s - 1.0))
        total = rates.sum(axis=1) ** s  # (P, n_t)
        return lin + self.capacity_scale * total[:, None, :]


@dataclass(frozen=True)
class LinearConstraintSystem:
    """Dense head-constraint system B q <= b with per-variable bounds."""

    B: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        for a in (self.B, self.b, self.lo, self.hi):
            a.setflags(write=False)


@dataclass(frozen=True)
class Scenario:
    """Physics configuration shared by every coalition structure.

    Constraints never depend on the coalition structure, which is what
    lets coarse Pareto sets nest inside fine ones.
    """

    name: str
    agents: AgentSet
    wells: tuple[Well, ...]
    n_t: int
    dt: float  # seconds
    storage: float  # S, dimensionless
    transmissivity: float  # T, m^2/s
    q_min: float
    q_max: float
    h_crit: float
    model: str = "linear"  # "linear" | "proxy"
    gamma: tuple[float, ...] = ()
    r_well: float = 0.2  # representative constraint radius, metres
    rate_unit: str = "Mm3/year"
    volume_unit: str = "Mm3"
    proxy: NonlinearProxyModel | None = None

    def __post_init__(self):
        if self.n_t < 1 or self.dt <= 0:
            raise ScenarioError("need n_t >= 1 and dt > 0")
        if self.q_min > self.q_max:
            raise ScenarioError("q_min must not exceed q_max")
        if self.storage <= 0 or self.transmissivity <= 0:
            raise ScenarioError("S and T must be positive")
        if self.model not in ("linear", "proxy"):
            raise ScenarioError(f"unknown model {self.model!r}")
        if self.model == "proxy" and self.proxy is None:
            raise ScenarioError("proxy scenarios need proxy parameters")
        for w in self.wells:
            if not 0 <= w.agent < self.agents.n_agents:
                raise ScenarioError("well owner out of range")
            if not 0 <= w.start_offset < self.n_t:
                raise ScenarioError("start offset must leave at least one interval")
        gamma = self.gamma or tuple(1.0 for _ in range(self.agents.n_agents))
        if len(gamma) != self.agents.n_agents:
            raise ScenarioError("one gamma weight per agent")
        object.__setattr__(self, "gamma", tuple(float(g) for g in gamma))

    @property
    def n_wells(self) -> int:
        return len(self.wells)

    @property
    def n_agents(self) -> int:
        return self.agents.n_agents

    @property
    def dt_years(self) -> float:
        return self.dt / YEAR_SECONDS

    @property
    def active_vars(self) -> tuple[tuple[int, int], ...]:
        """Decision layout: (well, interval) pairs, well-major, post-start only."""
        return tuple(
            (k, n) for k, w in enumerate(self.wells) for n in range(w.start_offset, self.n_t)
        )

    @property
    def n_dv(self) -> int:
        return len(self.active_vars)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.n_dv, self.q_min)
        hi = np.full(self.n_dv, self.q_max)
        return lo, hi

    def feasibility_tol(self) -> float:
        return FEAS_RTOL * (1.0 + abs(self.h_crit))

    def pad_rates(self, q: np.ndarray) -> np.ndarray:
        """(..., n_dv) decision vectors -> (..., n_w, n_t) rate tensors."""
        q = np.asarray(q, dtype=np.float64)
        if q.shape[-1] != self.n_dv:
            raise LengthMismatch(f"expected {self.n_dv} decision variables")
        flat = q.reshape(-1, self.n_dv)
        rates = np.zeros((flat.shape[0], self.n_wells, self.n_t))
        for col, (k, n) in enumerate(self.active_vars):
            rates[:, k, n] = flat[:, col]
        return rates.reshape(q.shape[:-1] + (self.n_wells, self.n_t))

    def agent_objective_matrix(self) -> np.ndarray:
        """(n_agents, n_dv) map from rates to per-agent injected volumes."""
        M = np.zeros((self.n_agents, self.n_dv))
        for col, (k, _) in enumerate(self.active_vars):
            M[self.wells[k].agent, col] = self.dt_years
        return M


def _well_distances(scenario: Scenario) -> np.ndarray:
    """Pairwise evaluation distances; the self distance is r_well."""
    xs = np.array([w.x for w in scenario.wells])
    ys = np.array([w.y for w in scenario.wells])
    r = np.hypot(xs[:, None] - xs[None, :], ys[:, None] - ys[None, :])
    np.fill_diagonal(r, scenario.r_well)
    return r


def _w_table(scenario: Scenario) -> np.ndarray:
    """W values per (observation well j, source well k, lag m intervals)."""
    r = _well_distances(scenario)
    S, T, dt = scenario.storage, scenario.transmissivity, scenario.dt
    out = np.zeros((scenario.n_wells, scenario.n_wells, scenario.n_t + 1))
    for m in range(1, scenario.n_t + 1):
        tau = m * dt
        for j in range(scenario.n_wells):
            for k in range(scenario.n_wells):
                out[j, k, m] = well_function(S * r[j, k] ** 2 / (4.0 * T * tau))
    return out


def head_change(scenario: Scenario, rates: np.ndarray, x: float, y: float, t: float) -> float:
    """Head change at a free point, by superposition of rate changes.

    ``rates`` is the full (n_w, n_t) rate matrix in scenario units.
    Raises at exact well centers, where the Theis kernel diverges;
    constraint rows instead use the representative radius (see
    ``head_at_well``).
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (scenario.n_wells, scenario.n_t):
        raise LengthMismatch("rates must be (n_wells, n_t)")
    if t <= 0:
        return 0.0
    S, T, dt = scenario.storage, scenario.transmissivity, scenario.dt
    total = 0.0
    for k, w in enumerate(scenario.wells):
        r2 = (x - w.x) ** 2 + (y - w.y) ** 2
        if r2 == 0.0:
            raise EvaluationAtWellCenter(f"point coincides with well {k}")
        prev = 0.0
        for n in range(scenario.n_t):
            if n * dt >= t:
                break
            dq = rates[k, n] - prev
            prev = rates[k, n]
            if dq != 0.0:
                chi = S * r2 / (4.0 * T * (t - n * dt))
                total += Q_VOL * dq / (4.0 * math.pi * T) * well_function(chi)
    return total


def head_at_well(scenario: Scenario, rates: np.ndarray, well: int, t: float) -> float:
    """Head change at well ``well``'s representative point.

    Same superposition as ``head_change`` but with the self term taken
    at radius r_well and cross terms at center-to-center distance, the
    convention the constraint matrix uses.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (scenario.n_wells, scenario.n_t):
        raise LengthMismatch("rates must be (n_wells, n_t)")
    if t <= 0:
        return 0.0
    dists = _well_distances(scenario)
    S, T, dt = scenario.storage, scenario.transmissivity, scenario.dt
    total = 0.0
    for k in range(scenario.n_wells):
        r2 = dists[well, k] ** 2
        prev = 0.0
        for n in range(scenario.n_t):
            if n * dt >= t:
                break
            dq = rates[k, n] - prev
            prev = rates[k, n]
            if dq != 0.0:
                chi = S * r2 / (4.0 * T * (t - n * dt))
                total += Q_VOL * dq / (4.0 * math.pi * T) * well_function(chi)
    return total


def assemble_linear(scenario: Scenario) -> LinearConstraintSystem:
    """Dense constraint system: head at every well at every interval end.

    Row (i, j) is the head at well j's representative point at time
    (i+1)*dt; columns are the active decision variables.  Built from the
    W table and the per-well telescoping of rates into rate changes.
    """
    n_w, n_t = scenario.n_wells, scenario.n_t
    wtab = _w_table(scenario)
    coef = Q_VOL / (4.0 * math.pi * scenario.transmissivity)
    # Btilde acts on rate *changes*; fold the telescoping difference in
    # directly: rate q[k, n] contributes (W[lag] - W[lag - 1]) at lag >= 1.
    rows = n_t * n_w
    B_full = np.zeros((rows, n_w * n_t))
    for i in range(1, n_t + 1):  # evaluation time i*dt
        for j in range(n_w):
            row = (i - 1) * n_w + j
            for k in range(n_w):
                for n in range(min(i, n_t)):  # interval n starts at n*dt
                    lag = i - n
                    w_now = wtab[j, k, lag]
                    w_next = wtab[j, k, lag - 1] if lag - 1 >= 1 else 0.0
                    B_full[row, k * n_t + n] = coef * (w_now - w_next)
    cols = [k * n_t + n for (k, n) in scenario.active_vars]
    B = B_full[:, cols].copy()
    b = np.full(rows, float(scenario.h_crit))
    lo, hi = scenario.bounds()
    return LinearConstraintSystem(B=B, b=b, lo=lo, hi=hi)


def agent_objectives(scenario: Scenario, q: np.ndarray) -> np.ndarray:
    """Per-agent injected volume for a decision vector."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape[-1] != scenario.n_dv:
        raise LengthMismatch(f"expected {scenario.n_dv} decision variables")
    return q @ scenario.agent_objective_matrix().T


def evaluate_constraints(
    scenario: Scenario, model, q: np.ndarray
) -> tuple[np.ndarray, float]:
    """Model-constraint violations and the overall max violation.

    The violations vector covers the model rows g_i - g_max; the scalar
    additionally covers the rate bounds.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (scenario.n_dv,):
        raise LengthMismatch(f"expected {scenario.n_dv} decision variables")
    if isinstance(model, LinearConstraintSystem):
        g = model.B @ q
        viol = np.maximum(0.0, g - model.b)
    elif isinstance(model, NonlinearProxyModel):
        rates = scenario.pad_rates(q[None, :])
        g = model.pressure(rates)[0]
        viol = np.maximum(0.0, (g - scenario.h_crit).ravel())
    else:
        raise ScenarioError(f"unknown constraint model {type(model).__name__}")
    lo, hi = scenario.bounds()
    bound_viol = max(float(np.max(lo - q, initial=0.0)), float(np.max(q - hi, initial=0.0)))
    return viol, max(float(viol.max(initial=0.0)), bound_viol)


class Evaluator:
    """Batched scenario evaluation with the single model-call counter.

    Every physics evaluation in the package goes through ``evaluate``;
    budget reports read ``count``.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.count = 0
        self._agent_matrix = scenario.agent_objective_matrix()
        self._linear = assemble_linear(scenario) if scenario.model == "linear" else None
        self.feas_tol = scenario.feasibility_tol()
        self.n_dv = scenario.n_dv
        self.lower, self.upper = scenario.bounds()

    def evaluate(self, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(P, n_dv) population -> (per-agent values (P, n_agents), max violation (P,))."""
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[1] != self.scenario.n_dv:
            raise LengthMismatch(f"expected {self.scenario.n_dv} decision variables")
        self.count += Q.shape[0]
        values = Q @ self._agent_matrix.T
        lo, hi = self.scenario.bounds()
        bound_viol = np.maximum(
            (lo - Q).max(axis=1, initial=0.0), (Q - hi).max(axis=1, initial=0.0)
        )
        if self._linear is not None:
            g = Q @ self._linear.B.T
            model_viol = np.maximum(0.0, g - self._linear.b).max(axis=1, initial=0.0)
        else:
            rates = self.scenario.pad_rates(Q)
            g = self.scenario.proxy.pressure(rates)
            model_viol = np.maximum(0.0, g - self.scenario.h_crit).reshape(Q.shape[0], -1).max(
                axis=1, initial=0.0
            )
        return values, np.maximum(model_viol, bound_viol)

    def is_feasible(self, max_violation: np.ndarray) -> np.ndarray:
        return np.asarray(max_violation) <= self.feas_tol


def scenario_to_dict(s: Scenario) -> dict:
    """JSON-ready scenario echo with explicit unit annotations."""
    out = {
        "format_version": 1,
        "name": s.name,
        "model": s.model,
        "agent_labels": list(s.agents.labels),
        "wells": [
            {"x_m": w.x, "y_m": w.y, "agent": w.agent, "start_offset_intervals": w.start_offset}
            for w in s.wells
        ],
        "n_intervals": s.n_t,
        "interval_seconds": s.dt,
        "storage_coefficient": s.storage,
        "transmissivity_m2_per_s": s.transmissivity,
        "rate_min": s.q_min,
        "rate_max": s.q_max,
        "rate_unit": s.rate_unit,
        "volume_unit": s.volume_unit,
        "pressure_limit": s.h_crit,
        "agent_weights": list(s.gamma),
        "well_radius_m": s.r_well,
    }
    if s.proxy is not None:
        out["proxy"] = {
            "interference": [[float(v) for v in row] for row in s.proxy.interference],
            "saturation_exponent": s.proxy.saturation_exponent,
            "capacity_scale": s.proxy.capacity_scale,
        }
    return out


def scenario_from_dict(d: dict) -> Scenario:
    try:
        labels = tuple(d["agent_labels"])
        proxy = None
        if "proxy" in d and d["proxy"] is not None:
            proxy = NonlinearProxyModel(
                interference=np.array(d["proxy"]["interference"], dtype=np.float64),
                saturation_exponent=float(d["proxy"]["saturation_exponent"]),
                capacity_scale=float(d["proxy"]["capacity_scale"]),
            )
        return Scenario(
            name=d.get("name", "scenario"),
            agents=AgentSet(len(labels), labels),
            wells=tuple(
                Well(
                    x=float(w["x_m"]),
                    y=float(w["y_m"]),
                    agent=int(w["agent"]),
                    start_offset=int(w.get("start_offset_intervals", 0)),
                )
                for w in d["wells"]
            ),
            n_t=int(d["n_intervals"]),
            dt=float(d["interval_seconds"]),
            storage=float(d["storage_coefficient"]),
            transmissivity=float(d["transmissivity_m2_per_s"]),
            q_min=float(d["rate_min"]),
            q_max=float(d["rate_max"]),
            h_crit=float(d["pressure_limit"]),
            model=d.get("model", "linear"),
            gamma=tuple(d.get("agent_weights", ())),
            r_well=float(d.get("well_radius_m", 0.2)),
            rate_unit=d.get("rate_unit", "Mm3/year"),
            volume_unit=d.get("volume_unit", "Mm3"),
            proxy=proxy,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))
