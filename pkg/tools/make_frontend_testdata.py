"""Generates frontend/testdata: run bundles plus CLI-derived game reports.

The explorer's vitest suite replays the same criteria client-side and
must match these reports to 1e-9 relative.
"""

import json
from pathlib import Path

from cpareto.bundle import RunBundle, canonical_json
from cpareto.cli import game_report
from cpareto.evomoo import EvoConfig, StrategyKind, run_strategy
from cpareto.fixtures import load_fixture
from cpareto.games import DeviationClass, DeviationRule
from cpareto.lpsolve import sweep_all_structures
from cpareto.pareto import FavorAgent, UtopiaWeighted

OUT = Path(__file__).resolve().parents[1] / "frontend" / "testdata"

BETAS = [
    (1 / 3, 1 / 3, 1 / 3),
    (0.45, 0.45, 0.1),
    (0.98, 0.01, 0.01),
    (0.2, 0.3, 0.5),
    (0.6, 0.2, 0.2),
]
PS = [1.0, 1.5, 2.0, 3.0, 4.0]

RULE = DeviationRule(
    classes=frozenset({DeviationClass.SINGLE_EXIT, DeviationClass.PAIR_EXIT}), eta=1.0
)


def make_tc1_bundle() -> RunBundle:
    scenario = load_fixture("testcase1")
    archives = sweep_all_structures(scenario)
    return RunBundle(
        scenario=scenario, method="linear", strategy="nonnested",
        config={"grid": "default"}, seed=0, archives=archives,
        budget={"method": "linear"},
    )


def make_proxy_bundle() -> RunBundle:
    scenario = load_fixture("proxy_small")
    config = EvoConfig(
        pop_size=40, generations=20, seed=3, cso_pop_size=30, cso_generations=20
    )
    archives, report = run_strategy(scenario, StrategyKind.TOP_DOWN, config)
    return RunBundle(
        scenario=scenario, method="evolutionary", strategy="topdown",
        config=config.to_dict(), seed=3, archives=archives,
        budget=report.to_dict(),
    )


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, bundle in [("tc1", make_tc1_bundle()), ("proxy", make_proxy_bundle())]:
        bundle_file = f"bundle_{name}.json"
        (OUT / bundle_file).write_text(bundle.to_json() + "\n", encoding="utf-8")
        cases = []
        idx = 0
        for beta in BETAS:
            for p in PS:
                crit = UtopiaWeighted(beta, p)
                report = game_report(bundle, crit, RULE, rounded=True)
                fname = f"report_{name}_{idx:02d}.json"
                (OUT / fname).write_text(canonical_json(report) + "\n", encoding="utf-8")
                cases.append({
                    "report": fname,
                    "criterion": {"kind": "utopia", "beta": list(beta), "p": p},
                })
                idx += 1
        for agent in range(3):
            report = game_report(bundle, FavorAgent(agent), RULE, rounded=True)
            fname = f"report_{name}_favor{agent}.json"
            (OUT / fname).write_text(canonical_json(report) + "\n", encoding="utf-8")
            cases.append({
                "report": fname,
                "criterion": {"kind": "favor", "agent": agent + 1},
            })
        manifest.append({"bundle": bundle_file, "cases": cases})
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    total = sum(len(m["cases"]) for m in manifest)
    print(f"wrote {total} reports for {len(manifest)} bundles to {OUT}")


if __name__ == "__main__":
    main()
