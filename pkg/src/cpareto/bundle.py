"""RunBundle: the self-contained artifact exchanged with the explorer.

A bundle is one JSON document: the full scenario echo, one archive per
coalition structure, the run configuration and the evaluation budget.
Serialization is canonical (sorted keys, fixed separators, floats with
17 significant digits), so identical runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .coalitions import AgentSet, enumerate_structures
from .errors import BundleError
from .pareto import ObjectivePoint, ParetoArchive
from .physics import Scenario, scenario_from_dict, scenario_to_dict

FORMAT_VERSION = 1


def _canon(value, out: list[str]) -> None:
    if value is None or value is True or value is False:
        out.append("null" if value is None else ("true" if value else "false"))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        f = float(value)
        if not math.isfinite(f):
            raise BundleError("bundles cannot carry non-finite numbers")
        out.append(format(f, ".17g"))
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _canon(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _canon(item, out)
        out.append("]")
    else:
        raise BundleError(f"cannot serialize {type(value).__name__}")


def canonical_json(value) -> str:
    """Deterministic JSON text: sorted keys, %.17g floats."""
    out: list[str] = []
    _canon(value, out)
    return "".join(out)


@dataclass
class RunBundle:
    scenario: Scenario
    method: str  # "linear" | "evolutionary"
    strategy: str | None
    config: dict
    seed: int | None
    archives: dict[str, ParetoArchive]
    budget: dict = field(default_factory=dict)
    games: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        keys = [cs.canonical_key for cs in enumerate_structures(self.scenario.agents)]
        missing = [k for k in keys if k not in self.archives]
        if missing:
            raise BundleError(f"bundle is missing archives: {', '.join(missing)}")
        return {
            "format_version": FORMAT_VERSION,
            "scenario": scenario_to_dict(self.scenario),
            "agent_labels": list(self.scenario.agents.labels),
            "method": self.method,
            "strategy": self.strategy,
            "config": self.config,
            "seed": self.seed,
            "archives": {
                key: [
                    {
                        "decision": p.decision,
                        "agent_values": p.agent_values,
                    }
                    for p in self.archives[key].points
                ]
                for key in keys
            },
            "budget": self.budget,
            "games": self.games,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def _load_schema(name: str) -> dict:
    text = resources.files("cpareto").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def validate_bundle_dict(data: dict) -> None:
    try:
        jsonschema.validate(data, _load_schema("bundle.schema.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise BundleError(f"bundle schema violation at '{path}': {exc.message}") from exc
    if data["format_version"] != FORMAT_VERSION:
        raise BundleError(f"unsupported bundle format_version {data['format_version']}")


def validate_scenario_dict(data: dict) -> None:
    try:
        jsonschema.validate(data, _load_schema("scenario.schema.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise BundleError(f"scenario schema violation at '{path}': {exc.message}") from exc


def bundle_from_dict(data: dict) -> RunBundle:
    validate_bundle_dict(data)
    scenario = scenario_from_dict(data["scenario"])
    n = scenario.n_agents
    structures = {cs.canonical_key: cs for cs in enumerate_structures(scenario.agents)}
    archives: dict[str, ParetoArchive] = {}
    for key, rows in data["archives"].items():
        if key not in structures:
            raise BundleError(f"unknown structure key {key!r}")
        points = []
        for row in rows:
            vals = np.asarray(row["agent_values"], dtype=np.float64)
            if vals.shape[0] != n:
                raise BundleError(f"agent_values length mismatch in {key!r}")
            points.append(
                ObjectivePoint(
                    decision=np.asarray(row["decision"], dtype=np.float64),
                    agent_values=vals,
                    feasible=True,
                    max_constraint_violation=0.0,
                )
            )
        archives[key] = ParetoArchive(structures[key], scenario.gamma, points, _validated=True)
    missing = [k for k in structures if k not in archives]
    if missing:
        raise BundleError(f"bundle is missing archives: {', '.join(missing)}")
    return RunBundle(
        scenario=scenario,
        method=data["method"],
        strategy=data.get("strategy"),
        config=data.get("config", {}),
        seed=data.get("seed"),
        archives=archives,
        budget=data.get("budget", {}),
        games=data.get("games", {}),
    )


def load_bundle(path: str | Path) -> RunBundle:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read bundle: {exc}") from exc
    return bundle_from_dict(data)
