"""Shared fixtures: the expensive sweeps and strategy runs computed once."""

from __future__ import annotations

import time

import numpy as np
import pytest

from cpareto.evomoo import EvoConfig, StrategyKind, run_strategy
from cpareto.fixtures import load_fixture
from cpareto.lpsolve import sweep_all_structures

# grid used for the Table-1 acceptance runs (the m >= 200 contract; the
# two-objective fronts need the finer grid to resolve every vertex)
ACCEPT_GRID = {1: 1, 2: 1000, 3: 200, 4: 24}


def acceptance_resolution(d: int) -> int:
    return ACCEPT_GRID.get(d, 20)


@pytest.fixture(scope="session")
def tc1_scenario():
    return load_fixture("testcase1")


@pytest.fixture(scope="session")
def tc2_scenario():
    return load_fixture("testcase2")


TIMINGS: dict[str, float] = {}


@pytest.fixture(scope="session")
def tc1_archives(tc1_scenario):
    t0 = time.time()
    archives = sweep_all_structures(tc1_scenario, resolution_for=acceptance_resolution)
    TIMINGS["tc1_sweep"] = time.time() - t0
    return archives


@pytest.fixture(scope="session")
def tc2_archives(tc2_scenario):
    return sweep_all_structures(tc2_scenario)  # default grids


@pytest.fixture(scope="session")
def proxy_small_topdown():
    scenario = load_fixture("proxy_small")
    config = EvoConfig(
        pop_size=80, generations=60, seed=11, cso_pop_size=40, cso_generations=40
    )
    return run_strategy(scenario, StrategyKind.TOP_DOWN, config)


@pytest.fixture(scope="session")
def proxy_offsets_topdown():
    scenario = load_fixture("proxy_offsets")
    config = EvoConfig(
        pop_size=80, generations=60, seed=11, cso_pop_size=40, cso_generations=40
    )
    return run_strategy(scenario, StrategyKind.TOP_DOWN, config)


_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def record_criterion(name: str, passed: bool) -> None:
    _ACCEPTANCE_RESULTS.append((name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
