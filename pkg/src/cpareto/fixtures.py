"""Bundled scenario fixtures.

Two groundwater cases (three and four agents on a 10 km square, exact
linear physics) and three synthetic proxy cases (a single-interval tiny
one for oracle-backed tests, a five-interval one, and a nine-well one
with staggered injection starts).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .physics import Scenario, load_scenario

FIXTURES = {
    "testcase1": "testcase1.json",
    "testcase2": "testcase2.json",
    "proxy_tiny": "proxy_tiny.json",
    "proxy_small": "proxy_small.json",
    "proxy_offsets": "proxy_offsets.json",
}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}")
    return Path(str(resources.files("cpareto").joinpath("data", FIXTURES[name])))


def load_fixture(name: str) -> Scenario:
    return load_scenario(fixture_path(name))
