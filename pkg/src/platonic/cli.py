"""Command-line front end: scenario ingestion, command dispatch and
machine-readable reports.

Exit codes: 0 success, 1 unparseable scenario, 2 model fails validation,
3 internal inconsistency between the arbitrage and measure searches.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import bayes, hedging
from .ftap import (
    FtapInconsistencyError,
    InvalidModelError,
    MeasureCertificate,
    find_measure,
    ftap_verdict,
    project_prices,
)
from .market import MarketModel, as_float_model, validate
from .numeric import format_number
from .probspace import RandomVariable
from .scenario import Scenario, ScenarioError, parse_scenario, serialize_model

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3


def _fmt(value):
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return format_number(value)
    return value


def _measure_doc(cert: MeasureCertificate, model: MarketModel) -> dict:
    return {
        "kind": cert.kind,
        "q": {o: _fmt(q) for o, q in zip(model.space.outcomes, cert.q_values)},
        "min_mass": _fmt(cert.min_mass),
        "full_support": cert.full_support,
        "generator_expectations": _fmt(list(cert.verification)),
        "max_residual": _fmt(max((abs(v) for v in cert.verification), default=0)),
    }


def _print_report(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    def walk(node, indent=0):
        pad = "  " * indent
        if isinstance(node, dict):
            for k, v in node.items():
                if isinstance(v, (dict, list)):
                    print(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    print(f"{pad}{k}: {v}")
        elif isinstance(node, list):
            for v in node:
                if isinstance(v, (dict, list)):
                    walk(v, indent + 1)
                else:
                    print(f"{pad}- {v}")
    walk(report)


def _finish(report: dict, args) -> None:
    started = getattr(args, "_started", None)
    report["timing_ms"] = round((time.perf_counter() - started) * 1000, 3) if started else 0.0
    _print_report(report, args.json)


def _load(args) -> tuple[Scenario, dict]:
    scenario = parse_scenario(args.scenario)
    claims = dict(scenario.claims)
    if args.float_mode:
        scenario.model = as_float_model(scenario.model)
        claims = {k: RandomVariable(tuple(float(v) for v in rv)) for k, rv in claims.items()}
        scenario.claims = claims
    return scenario, {
        "command": args.command,
        "scenario": scenario.name,
        "mode": "float" if args.float_mode else "exact",
        "tol": args.tol if args.float_mode else "0",
        "seed": args.seed,
    }


def _claim(scenario: Scenario, name: str) -> RandomVariable:
    if name not in scenario.claims:
        raise ScenarioError(
            f"claims.{name}: not defined (available: {', '.join(sorted(scenario.claims)) or 'none'})"
        )
    return scenario.claims[name]


def _tol_arg(args):
    return args.tol if args.float_mode else None


def cmd_validate(args) -> int:
    scenario, report = _load(args)
    violations = validate(scenario.model)
    report["violations"] = violations
    report["valid"] = not violations
    _finish(report, args)
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_ftap(args) -> int:
    scenario, report = _load(args)
    mode = "long_only" if args.long_only else "free"
    verdict = ftap_verdict(scenario.model, mode, _tol_arg(args))
    report["strategy_mode"] = mode
    report["verdict"] = verdict.kind
    if verdict.measure is not None:
        report["measure"] = _measure_doc(verdict.measure, scenario.model)
    if verdict.arbitrage is not None:
        cert = verdict.arbitrage
        report["arbitrage"] = {
            "terminal_gain": _fmt(list(cert.terminal_gain)),
            "consumption": _fmt(list(cert.consumption)),
            "asset_set": sorted(cert.strategy.asset_set),
            "legs": [
                {
                    "from": _fmt(leg.start),
                    "to": _fmt(leg.end),
                    "holdings": {
                        a: _fmt(list(h))
                        for a, h in zip(sorted(cert.strategy.asset_set), leg.holdings)
                    },
                }
                for leg in cert.strategy.legs
            ],
        }
    _finish(report, args)
    return EXIT_OK


def cmd_project(args) -> int:
    scenario, report = _load(args)
    asset_set = frozenset(args.set.split(","))
    if args.measure == "search":
        cert = find_measure(scenario.model, "martingale", _tol_arg(args))
        if cert is None:
            raise FtapInconsistencyError("no martingale measure exists; nothing to project", None, None)
    else:
        loaded = json.loads(Path(args.measure).read_text())
        q_doc = loaded["measure"]["q"]
        cert = MeasureCertificate(
            q_values=tuple(Fraction(str(q_doc[o])) for o in scenario.model.space.outcomes),
            kind=loaded["measure"]["kind"],
            min_mass=min(Fraction(str(q_doc[o])) for o in scenario.model.space.outcomes),
            verification=(),
        )
    projected = project_prices(scenario.model, cert, asset_set, _tol_arg(args))
    report["asset_set"] = sorted(asset_set)
    report["measure"] = _measure_doc(cert, scenario.model) if cert.verification else {"kind": cert.kind}
    report["projections"] = {
        asset: [ _fmt(list(rv)) for rv in path ] for asset, path in projected.items()
    }
    report["times"] = _fmt(list(scenario.model.times))
    _finish(report, args)
    return EXIT_OK


def cmd_superhedge(args) -> int:
    scenario, report = _load(args)
    mode = "long_only" if args.long_only else "free"
    claim = _claim(scenario, args.claim)
    hedge, dual = hedging.superreplicate(scenario.model, claim, mode, _tol_arg(args))
    gap = hedge.price - sum(q * v for q, v in zip(dual.q_values, claim))
    report["strategy_mode"] = mode
    report["claim"] = args.claim
    report["price"] = _fmt(hedge.price)
    report["lambdas"] = _fmt(list(hedge.lambdas))
    report["consumption"] = _fmt(list(hedge.consumption))
    report["duality_gap"] = _fmt(gap)
    report["dual_measure"] = _measure_doc(dual, scenario.model)
    _finish(report, args)
    return EXIT_OK


def cmd_interval(args) -> int:
    scenario, report = _load(args)
    claim = _claim(scenario, args.claim)
    interval = hedging.price_interval(scenario.model, claim, tol=_tol_arg(args))
    report["claim"] = args.claim
    report["lower"] = _fmt(interval.lower)
    report["upper"] = _fmt(interval.upper)
    report["width"] = _fmt(interval.width)
    report["attained"] = {"lower": interval.attained_lower, "upper": interval.attained_upper}
    if interval.replication is not None:
        x, lambdas = interval.replication
        report["replication"] = {"price": _fmt(x), "lambdas": _fmt(list(lambdas))}
    for side, witness in (("upper", interval.upper_witness), ("lower", interval.lower_witness)):
        if witness is not None:
            report[f"{side}_openness"] = {
                "optimizer_null_outcomes": [
                    scenario.model.space.outcomes[i] for i in witness.null_outcomes
                ],
                "eta": _fmt(witness.eta),
                "full_support_value_within_eta": _fmt(witness.achieved),
            }
    _finish(report, args)
    return EXIT_OK


def cmd_check_duality(args) -> int:
    scenario, report = _load(args)
    model = scenario.model
    checks: dict = {}
    if model.n_outcomes <= 6:
        polar = hedging.polar_cone_check(model, seed=args.seed)
        checks["polar_cone"] = {
            "vertex_sets_match": polar.match,
            "polar_vertex_count": len(polar.polar_vertices),
            "dual_vertex_count": len(polar.dual_vertices),
            "double_inclusion": polar.polar_in_dual and polar.dual_in_polar,
            "cone_samples_ok": polar.cone_inequality_samples_ok,
        }
    else:
        checks["polar_cone"] = "skipped (more than 6 outcomes)"
    per_claim = {}
    for name, claim in sorted(scenario.claims.items()):
        hedge, dual = hedging.superreplicate(model, claim, "free", _tol_arg(args))
        attain = hedging.attainability_set_check(model, claim, _tol_arg(args))
        per_claim[name] = {
            "price": _fmt(hedge.price),
            "dual_value": _fmt(sum(q * v for q, v in zip(dual.q_values, claim))),
            "gap": _fmt(hedge.price - sum(q * v for q, v in zip(dual.q_values, claim))),
            "attainability_tests_agree": attain.consistent,
            "replicable": attain.zero_width,
        }
    checks["claims"] = per_claim
    report["checks"] = checks
    _finish(report, args)
    return EXIT_OK


def cmd_bayes_build(args) -> int:
    scenario, report = _load(args)
    doc = serialize_model(scenario.model, scenario.claims, name=scenario.name + "-built")
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True))
        report["written"] = str(args.out)
    else:
        report["scenario"] = doc
    report["outcomes"] = len(scenario.model.space.outcomes)
    _finish(report, args)
    return EXIT_OK


def cmd_experiment_free_lunch(args) -> int:
    report = {
        "command": "experiment free-lunch",
        "mode": "exact",
        "seed": args.seed,
        "max_n": args.max_n,
    }
    rows = bayes.free_lunch_sweep(args.max_n)
    report["rows"] = [
        {
            "n": r["n"],
            "verdict": r["verdict"],
            "gap": _fmt(r["gap"]),
            "floor": _fmt(r["floor"]),
            "hit_probability": _fmt(r["hit_probability"]),
            "measure_min_mass": _fmt(r["min_mass"]),
        }
        for r in rows
    ]
    gaps = [r["gap"] for r in rows]
    report["gap_strictly_decreasing"] = all(a > b for a, b in zip(gaps, gaps[1:]))
    report["all_no_arbitrage"] = all(r["verdict"] == "NO_ARBITRAGE" for r in rows)
    _finish(report, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platonic",
        description="Finite-market lab: arbitrage, martingale measures, superhedging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_scenario=True):
        if needs_scenario:
            p.add_argument("scenario", help="path to a scenario JSON file")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--exact", dest="float_mode", action="store_false", default=False,
                           help="exact rational arithmetic (default)")
        group.add_argument("--float", dest="float_mode", action="store_true",
                           help="double precision with tolerance")
        p.add_argument("--tol", type=float, default=1e-9, help="float-mode tolerance")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized spot checks")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="json", action="store_true", default=True)
        fmt.add_argument("--table", dest="json", action="store_false")

    p = sub.add_parser("validate", help="report model invariant violations")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ftap", help="arbitrage verdict with certificate")
    common(p)
    p.add_argument("--long-only", action="store_true")
    p.set_defaults(func=cmd_ftap)

    p = sub.add_parser("project", help="project prices onto a trading filtration")
    common(p)
    p.add_argument("--set", required=True, help="comma-separated asset ids")
    p.add_argument("--measure", default="search", help="'search' or a report JSON with a measure")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("superhedge", help="superreplication price and hedge")
    common(p)
    p.add_argument("--claim", required=True)
    p.add_argument("--long-only", action="store_true")
    p.set_defaults(func=cmd_superhedge)

    p = sub.add_parser("interval", help="dual price interval and attainability")
    common(p)
    p.add_argument("--claim", required=True)
    p.set_defaults(func=cmd_interval)

    p = sub.add_parser("check-duality", help="polar cone and strong duality checks")
    common(p)
    p.set_defaults(func=cmd_check_duality)

    pb = sub.add_parser("bayes", help="scenario builders")
    bsub = pb.add_subparsers(dest="bayes_command", required=True)
    p = bsub.add_parser("build", help="materialize a builder scenario to a plain one")
    common(p)
    p.add_argument("--out", help="write the built scenario to this file")
    p.set_defaults(func=cmd_bayes_build)

    pe = sub.add_parser("experiment", help="built-in experiments")
    esub = pe.add_subparsers(dest="experiment_command", required=True)
    p = esub.add_parser("free-lunch", help="near-free-lunch truncation sweep")
    common(p, needs_scenario=False)
    p.add_argument("--max-n", type=int, default=8)
    p.set_defaults(func=cmd_experiment_free_lunch)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args._started = time.perf_counter()
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidModelError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FtapInconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    raise SystemExit(main())
