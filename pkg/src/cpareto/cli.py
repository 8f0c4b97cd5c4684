"""Command-line driver.

Subcommands: ``partitions`` (structures and graph edges), ``solve``
(scenario -> RunBundle), ``analyze`` (bundle -> game report), and
``export-fronts`` (bundle -> per-structure tables).  Exit codes: 0 on
success, 2 on bad input, 3 when no feasible point exists.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import bundle as bundle_mod
from .bundle import RunBundle, canonical_json, load_bundle, validate_scenario_dict
from .coalitions import AgentSet, build_graph, enumerate_structures
from .errors import BundleError, CParetoError, NoFeasibleFound, ScenarioError
from .evomoo import EvoConfig, StrategyKind, run_strategy
from .games import (
    DeviationClass,
    DeviationRule,
    build_game,
    classify,
    externalities,
    social_welfare,
    stable_structures,
)
from .lpsolve import default_resolution, sweep_all_structures
from .pareto import FavorAgent, UtopiaWeighted
from .physics import scenario_from_dict

EXIT_BAD_INPUT = 2
EXIT_NO_FEASIBLE = 3


class _Cli(click.Group):
    def main(self, *args, **kwargs):  # map usage errors to exit code 2
        kwargs.setdefault("standalone_mode", False)
        try:
            return super().main(*args, **kwargs)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_BAD_INPUT)
        except click.Abort:
            sys.exit(EXIT_BAD_INPUT)
        except NoFeasibleFound as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NO_FEASIBLE)
        except (CParetoError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_BAD_INPUT)


@click.group(cls=_Cli)
def main():
    """Coalition games over Pareto fronts of constrained injection problems."""


@main.command()
@click.argument("n", type=int)
@click.option("--json", "as_json", is_flag=True, help="emit JSON instead of text")
def partitions(n, as_json):
    """List all coalition structures over N agents and the graph edges."""
    graph = build_graph(AgentSet(n))
    if as_json:
        payload = {
            "n_agents": n,
            "structures": [
                {"key": cs.canonical_key, "level": cs.level} for cs in graph.nodes
            ],
            "edges": [list(e) for e in graph.edges],
        }
        click.echo(canonical_json(payload))
        return
    click.echo(f"{len(graph.nodes)} coalition structures over {n} agents")
    level = None
    for cs in graph.nodes:
        if cs.level != level:
            level = cs.level
            click.echo(f"level |CS| = {level}:")
        click.echo(f"  {cs.canonical_key}")
    click.echo(f"{len(graph.edges)} split edges:")
    for coarse, fine in graph.edges:
        click.echo(f"  {coarse}  ->  {fine}")


def _parse_grid(text: str | None):
    if not text:
        return None
    text = text.strip()
    if ":" not in text:
        m = int(text)
        return lambda d: m if d > 1 else 1
    table = {}
    for part in text.split(","):
        dim, m = part.split(":")
        table[int(dim)] = int(m)
    return lambda d: table.get(d, default_resolution(d))


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["linear", "evolutionary"]), required=True)
@click.option("--strategy", type=click.Choice([s.value for s in StrategyKind]), default="nonnested", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--pop", type=int, default=100, show_default=True, help="NSGA-II population size")
@click.option("--gens", type=int, default=100, show_default=True, help="NSGA-II generations")
@click.option("--grid", default=None, help="weight-grid resolution: 'M' or '2:1000,3:200'")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def solve(scenario_path, method, strategy, seed, pop, gens, grid, out_path):
    """Compute archives for every coalition structure and write a bundle."""
    with open(scenario_path, encoding="utf-8") as fh:
        data = json.load(fh)
    validate_scenario_dict(data)
    scenario = scenario_from_dict(data)

    if method == "linear":
        if scenario.model != "linear":
            raise ScenarioError("method=linear requires a linear scenario")
        if strategy == "bottomup":
            raise ScenarioError("bottom-up applies to the evolutionary method only")
        resolution_for = _parse_grid(grid) or default_resolution
        lp_count = [0]
        archives = sweep_all_structures(
            scenario, resolution_for=resolution_for, count_lp=lambda k: lp_count.__setitem__(0, lp_count[0] + k)
        )
        if strategy == "topdown":
            from .coalitions import CoalitionStructure
            from .pareto import restrict_archive

            singleton = CoalitionStructure.singletons(scenario.n_agents).canonical_key
            src = archives[singleton]
            archives = {
                key: (src if key == singleton else restrict_archive(src, bundle_cs))
                for key, bundle_cs in (
                    (cs.canonical_key, cs) for cs in enumerate_structures(scenario.agents)
                )
            }
        budget = {"lp_solves": lp_count[0], "method": "linear"}
        config = {"grid": grid or "default"}
        run = RunBundle(
            scenario=scenario, method="linear", strategy=strategy, config=config,
            seed=seed, archives=archives, budget=budget,
        )
    else:
        config_obj = EvoConfig(pop_size=pop, generations=gens, seed=seed)
        archives, report = run_strategy(scenario, StrategyKind(strategy), config_obj)
        run = RunBundle(
            scenario=scenario, method="evolutionary", strategy=strategy,
            config=config_obj.to_dict(), seed=seed, archives=archives,
            budget=report.to_dict(),
        )
    run.write(out_path)
    click.echo(f"bundle written to {out_path} ({len(run.archives)} structures)")


def _parse_weight(token: str) -> float:
    token = token.strip()
    if "/" in token:  # allow '1/3'
        num, den = token.split("/")
        return float(num) / float(den)
    return float(token)


def _parse_criterion(criterion, beta, p, agent, n_agents):
    if criterion == "utopia":
        if beta:
            parts = [_parse_weight(tok) for tok in beta.split(",")]
        else:
            parts = [1.0 / n_agents] * n_agents
        if len(parts) != n_agents:
            raise BundleError(f"need {n_agents} beta weights, got {len(parts)}")
        return UtopiaWeighted(tuple(parts), p)
    if agent is None:
        raise BundleError("--criterion favor needs --agent")
    return FavorAgent(agent - 1)  # CLI uses 1-based agent numbers


def _parse_deviations(text: str) -> frozenset[DeviationClass]:
    table = {
        "single": DeviationClass.SINGLE_EXIT,
        "pair": DeviationClass.PAIR_EXIT,
        "subset": DeviationClass.SUBSET_EXIT,
    }
    try:
        return frozenset(table[tok.strip()] for tok in text.split(",") if tok.strip())
    except KeyError as exc:
        raise BundleError(f"unknown deviation class {exc.args[0]!r}") from exc


def game_report(bundle: RunBundle, criterion, rule: DeviationRule, rounded: bool = True) -> dict:
    """Game table, externalities, welfare and stability as one JSON document.

    Values are reported rounded to whole units; the stability and
    classification run on the rounded table so the report is consistent
    with what it prints.
    """
    game = build_game(bundle.archives, criterion, bundle.scenario.agents)
    table = game.rounded(0) if rounded else game
    records = externalities(table) if bundle.scenario.n_agents >= 3 else []
    welfare, argmax = social_welfare(table)
    stable = stable_structures(table, rule)
    crit_echo = (
        {"kind": "utopia", "beta": list(criterion.agent_weights), "p": criterion.p}
        if isinstance(criterion, UtopiaWeighted)
        else {"kind": "favor", "agent": criterion.agent + 1}
    )
    return {
        "criterion": crit_echo,
        "deviation_rule": {
            "classes": sorted(c.value for c in rule.classes),
            "eta": rule.eta,
        },
        "rounded": rounded,
        "structures": [
            {
                "key": cs.canonical_key,
                "level": cs.level,
                "payoffs": table.payoffs[cs.canonical_key],
                "values": {c.key(): table.value(c, cs) for c in cs.coalitions},
                "welfare": welfare[cs.canonical_key],
            }
            for cs in table.structures
        ],
        "externalities": [
            {
                "coalition": r.coalition.key(),
                "coarse": r.coarse.canonical_key,
                "fine": r.fine.canonical_key,
                "value": r.value,
            }
            for r in records
        ],
        "externality_class": classify(records).value if records else "zero",
        "welfare_max": sorted(cs.canonical_key for cs in argmax),
        "stable": sorted(cs.canonical_key for cs in stable),
    }


def _render_report(report: dict) -> str:
    lines = []
    crit = report["criterion"]
    if crit["kind"] == "utopia":
        beta = ", ".join(f"{b:g}" for b in crit["beta"])
        lines.append(f"criterion: utopia-weighted (beta = [{beta}], p = {crit['p']:g})")
    else:
        lines.append(f"criterion: favor agent a{crit['agent']}")
    lines.append("")
    width = max(len(s["key"]) for s in report["structures"]) + 2
    for s in report["structures"]:
        vals = "  ".join(f"w({c})={v:g}" for c, v in s["values"].items())
        pay = ", ".join(f"{z:g}" for z in s["payoffs"])
        lines.append(f"{s['key']:<{width}} {vals}   payoffs = [{pay}]   W = {s['welfare']:g}")
    lines.append("")
    lines.append(f"externalities ({report['externality_class']}):")
    for r in report["externalities"]:
        lines.append(f"  eps({r['coalition']}, {r['coarse']} vs {r['fine']}) = {r['value']:g}")
    lines.append("welfare-maximizing structures: " + ", ".join(report["welfare_max"]))
    lines.append("stable structures: " + (", ".join(report["stable"]) or "(none)"))
    return "\n".join(lines)


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--criterion", type=click.Choice(["utopia", "favor"]), default="utopia", show_default=True)
@click.option("--beta", default=None, help="comma-separated agent weights (e.g. '1/3,1/3,1/3')")
@click.option("--p", type=float, default=2.0, show_default=True, help="norm exponent")
@click.option("--agent", type=int, default=None, help="favored agent (1-based)")
@click.option("--eta", type=float, default=1.0, show_default=True, help="deviation margin")
@click.option("--deviations", default="single,pair", show_default=True)
@click.option("--full-precision", is_flag=True, help="analyze unrounded values")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None, help="also write the JSON report here")
def analyze(bundle_path, criterion, beta, p, agent, eta, deviations, full_precision, json_out):
    """Build the game from a bundle and report its analysis."""
    run = load_bundle(bundle_path)
    crit = _parse_criterion(criterion, beta, p, agent, run.scenario.n_agents)
    rule = DeviationRule(classes=_parse_deviations(deviations), eta=eta)
    report = game_report(run, crit, rule, rounded=not full_precision)
    click.echo(_render_report(report))
    if json_out:
        Path(json_out).write_text(canonical_json(report) + "\n", encoding="utf-8")
        click.echo(f"JSON report written to {json_out}")


@main.command("export-fronts")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def export_fronts(bundle_path, fmt, out_dir):
    """Write one front table per coalition structure."""
    run = load_bundle(bundle_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    structures = {cs.canonical_key: cs for cs in enumerate_structures(run.scenario.agents)}
    for idx, (key, archive) in enumerate(run.archives.items()):
        cs = structures[key]
        M = archive.coalition_matrix()
        stem = f"front_{idx:02d}"
        if fmt == "json":
            payload = {
                "structure": key,
                "coalitions": [c.key() for c in cs.coalitions],
                "points": [
                    {
                        "decision": p.decision,
                        "agent_values": p.agent_values,
                        "coalition_values": M[i],
                    }
                    for i, p in enumerate(archive.points)
                ],
            }
            (out / f"{stem}.json").write_text(canonical_json(payload) + "\n", encoding="utf-8")
        else:
            cols = [f"w({c.key()})" for c in cs.coalitions]
            dcols = [f"q{i+1}" for i in range(run.scenario.n_dv)]
            rows = [f"# structure: {key}", ",".join(cols + dcols)]
            for i, point in enumerate(archive.points):
                rows.append(
                    ",".join(
                        [format(v, ".17g") for v in M[i]]
                        + [format(v, ".17g") for v in point.decision]
                    )
                )
            (out / f"{stem}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    click.echo(f"wrote {len(run.archives)} front tables to {out}")


if __name__ == "__main__":
    main()
