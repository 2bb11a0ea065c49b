"""Command-line front end.

Exit codes: 0 when everything passes, 1 when an experiment verdict fails,
2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import BrmGameError, SchemaError
from .experiments import SWEEP_HEADER, SWEEP_PARAMS, rows_to_csv, run_experiments, sweep
from .mechanisms import BRM_NAMES, brm_from_name
from .scenario import Scenario, load_scenario
from .simulation import SimConfig, compare_with_analytic, exact_config, simulate
from .solver import all_in_largest, solo
from .switching import check_p1, check_p2, compute_d_min
from .utility import round_utility

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON (default: the bundled default.json)")
    p.add_argument("--out", help="output directory (default: the scenario's output_dir)")
    p.add_argument("--seed", type=int, help="override the simulation seed (unsigned 64-bit)")
    p.add_argument("--grid-alpha", help="override the grid step, e.g. 1/10")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brmgame", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the scenario's experiments")
    _common(run)
    run.add_argument("--only", help="comma-separated experiment ids, e.g. E1,E3")

    sw = sub.add_parser("sweep", help="best response across values of one parameter")
    _common(sw)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", default="", help="comma-separated values")
    sw.add_argument("--brm", default="memoryless", choices=BRM_NAMES)

    sim = sub.add_parser("simulate", help="Monte Carlo run for one strategy")
    _common(sim)
    sim.add_argument("--brm", default="memoryless", choices=BRM_NAMES)
    sim.add_argument("--strategy", default="system",
                     help="solo, system, largest, or comma-separated weights")
    sim.add_argument("--rounds", type=int)
    sim.add_argument("--rho", type=int, default=2)
    sim.add_argument("--trace", action="store_true", help="also write the per-round rewards CSV")

    dm = sub.add_parser("dmin", help="marginal switching cost of the grid")
    _common(dm)

    cd = sub.add_parser("check-d", help="check the switching cost's monotonicity properties")
    _common(cd)
    return parser


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario)
    if args.grid_alpha:
        try:
            sc = sc.with_alpha(args.grid_alpha)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad --grid-alpha: {exc}") from exc
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise SchemaError("--seed must be an unsigned 64-bit integer")
        sc = sc.with_seed(args.seed)
    return sc


def _out_dir(args, sc: Scenario) -> Path:
    out = Path(args.out or sc.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SchemaError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    sc = _scenario(args)
    out = _out_dir(args, sc)
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    reports = run_experiments(sc, only)
    summary = {}
    for rep in reports:
        rep.write(out)
        summary[rep.experiment] = {"passed": rep.passed, "clauses": rep.clauses}
        print(f"{rep.experiment} {'PASS' if rep.passed else 'FAIL'}  {rep.title}")
        for name, ok in rep.clauses.items():
            print(f"    {'ok  ' if ok else 'FAIL'} {name}")
    _write_json(out / "summary.json", summary)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _parse_values(param: str, text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if param == "alpha":
        return items
    if param in ("rho", "t_ratio"):
        return [int(s) for s in items]
    return [float(s) for s in items]


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    out = _out_dir(args, sc)
    try:
        values = _parse_values(args.param, args.values)
    except ValueError as exc:
        raise SchemaError(f"bad --values: {exc}") from exc
    rows = sweep(sc, args.param, values, args.brm)
    path = out / f"sweep_{args.param}.csv"
    path.write_text(rows_to_csv(rows, SWEEP_HEADER), encoding="utf-8")
    print(path)
    return EXIT_OK


def _strategy(sc: Scenario, text: str):
    cfg = sc.game
    named = {"solo": solo(cfg), "system": cfg.f, "largest": all_in_largest(cfg)}
    if text in named:
        return named[text]
    try:
        return [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise SchemaError(f"bad --strategy: {exc}") from exc


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    out = _out_dir(args, sc)
    brm = sc.decentbrm if args.brm == "decentbrm" else brm_from_name(args.brm)
    cfg = exact_config(sc.game.evolve(rho=args.rho))
    g = _strategy(sc, args.strategy)
    rounds = args.rounds or int(sc.simulation["rounds"])
    sim = SimConfig(cfg, brm, rounds, int(sc.simulation["seed"]), rhos=(args.rho,),
                    replicas=int(sc.simulation.get("replicas", 4)),
                    record_granularity="per-round" if args.trace else "aggregate")
    res = simulate(sim, g)
    report = compare_with_analytic(res, round_utility(cfg, g, brm, sc.cost),
                                   float(sc.simulation.get("z_limit", 5.0)))
    doc = res.to_dict()
    doc["comparison"] = {"passed": report.passed, "checks": report.checks}
    _write_json(out / f"simulate_{brm.name}.json", doc)
    if args.trace:
        res.write_trace_csv(out / f"simulate_{brm.name}_trace.csv")
    print(json.dumps({"passed": report.passed, "checks": report.checks}, indent=2))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_dmin(args) -> int:
    sc = _scenario(args)
    d = compute_d_min(sc.cost, sc.game.grid())
    doc = {"alpha": str(sc.game.alpha), "p": sc.game.p, "switch_cost": sc.cost.to_dict(),
           "d_min": d.value, "d_min_exact": str(d.exact_value) if d.exact_value is not None else None,
           "witness": [list(w.weights) for w in d.witness]}
    if args.out:
        _write_json(_out_dir(args, sc) / "dmin.json", doc)
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_check_d(args) -> int:
    sc = _scenario(args)
    points = list(sc.game.grid())
    p1 = check_p1(sc.cost, points)
    p2 = check_p2(sc.cost, points)
    doc = {"alpha": str(sc.game.alpha), "p": sc.game.p, "switch_cost": sc.cost.to_dict(),
           "p1": {"checked_pairs": p1.checked_pairs, "violations": len(p1.violations)},
           "p2": {"qualifying_pairs": p2.qualifying_pairs, "literal_holds": p2.literal_holds,
                  "prose_holds": p2.prose_holds}}
    if args.out:
        _write_json(_out_dir(args, sc) / "check_d.json", doc)
    print(json.dumps(doc, indent=2))
    return EXIT_OK if p1.ok else EXIT_FAIL


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "simulate": cmd_simulate, "dmin": cmd_dmin,
            "check-d": cmd_check_d}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BrmGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
