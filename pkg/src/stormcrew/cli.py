"""Command line front end.

Subcommands: gen (synthetic scenario), replay (one arm), compare (both
arms plus metrics), solve-once (plan a snapshot file), serve (HTTP
service). Exit codes: 0 ok, 1 usage, 2 bad input data, 3 runtime
failure. Errors go to stderr with a stable machine-readable prefix:

    stormcrew: error[<Code>]: <message>

File outputs are deterministic byte for byte; wall-clock solve stats go
to a separate timing file so repeated runs diff clean.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import ServiceConfig, load_config
from .errors import (
    AwcMismatch,
    ConfigError,
    InvariantError,
    MismatchedScenario,
    SchemaError,
    StormcrewError,
    UnknownCrew,
)
from .metrics import catr_curve, catr_total, metrics_csv_rows, metrics_report, metrics_to_doc
from .model import validate_snapshot
from .planner import PlannerConfig, plan_pipelines, plan_to_doc
from .replay import POLICY_BAU, POLICY_OPT, replay, routelog_csv_rows, routelog_to_doc
from .scenario import GenParams, generate_scenario, load_scenario, save_scenario
from .travel import OfflineMatrixProvider

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

ERROR_PREFIX = "stormcrew: error"

_DATA_ERRORS = (
    SchemaError,
    InvariantError,
    AwcMismatch,
    ConfigError,
    MismatchedScenario,
    UnknownCrew,
    FileNotFoundError,
    IsADirectoryError,
    json.JSONDecodeError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message: str):  # noqa: A002 - argparse API
        self.print_usage(sys.stderr)
        print(f"{ERROR_PREFIX}[Usage]: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _offline_provider(args) -> OfflineMatrixProvider | None:
    nodes = getattr(args, "offline_nodes", None)
    matrix = getattr(args, "offline_matrix", None)
    if nodes is None and matrix is None:
        return None
    if nodes is None or matrix is None:
        raise ConfigError("--offline-nodes and --offline-matrix go together")
    return OfflineMatrixProvider.from_files(nodes, matrix)


def _catr_rows(log) -> list[list]:
    rows: list[list] = [["crew", "position", "cumulative_customers"]]
    for crew_id in sorted(log.visits):
        for pos, total in enumerate(catr_curve(log, crew_id), start=1):
            rows.append([crew_id, pos, total])
    rows.append(["__total__", "", catr_total(log)])
    return rows


# -- subcommands ---------------------------------------------------------


def cmd_gen(args) -> int:
    params = GenParams(
        n_crews=args.crews,
        n_outages=args.outages,
        horizon_hours=args.hours,
        fps_fraction=args.fps_fraction,
        area_km=args.area_km,
        arrival_profile=args.profile,
    )
    scenario = generate_scenario(args.seed, params)
    save_scenario(scenario, args.out)
    print(
        f"wrote {args.out}: {scenario.scenario_id} "
        f"({len(scenario.crews)} crews, {len(scenario.tickets)} tickets)"
    )
    return EXIT_OK


def cmd_replay(args) -> int:
    scenario = load_scenario(args.scenario)
    provider = _offline_provider(args)
    stats: list = []
    log = replay(
        scenario,
        policy=args.policy,
        cadence_minutes=args.cadence_minutes,
        provider=provider,
        solve_stats=stats,
    )
    _write_json(Path(args.out), routelog_to_doc(log))
    if args.csv:
        _write_csv(Path(args.csv), routelog_csv_rows(log))
    if args.timing:
        _write_json(Path(args.timing), {"solve_cycles": stats})
    report = metrics_report(log)
    print(
        f"{log.policy}: {sum(len(v) for v in log.visits.values())} visits, "
        f"{report.total_miles:.2f} miles, {report.crossover_count} crossovers"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    provider = _offline_provider(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    opt_stats: list = []
    bau_log = replay(scenario, policy="bau", cadence_minutes=args.cadence_minutes,
                     provider=provider)
    opt_log = replay(scenario, policy="opt", cadence_minutes=args.cadence_minutes,
                     provider=provider, solve_stats=opt_stats)

    _write_json(out_dir / "bau_routes.json", routelog_to_doc(bau_log))
    _write_json(out_dir / "opt_routes.json", routelog_to_doc(opt_log))
    _write_csv(out_dir / "bau_routes.csv", routelog_csv_rows(bau_log))
    _write_csv(out_dir / "opt_routes.csv", routelog_csv_rows(opt_log))

    report = metrics_report(opt_log, base=bau_log)
    base_report = metrics_report(bau_log)
    _write_json(out_dir / "metrics.json", {
        "optimized": metrics_to_doc(report),
        "baseline": metrics_to_doc(base_report),
    })
    _write_csv(out_dir / "metrics.csv", metrics_csv_rows(report))
    _write_csv(out_dir / "catr_bau.csv", _catr_rows(bau_log))
    _write_csv(out_dir / "catr_opt.csv", _catr_rows(opt_log))
    _write_json(out_dir / "timing.json", {"solve_cycles": opt_stats})

    print(
        f"baseline {base_report.total_miles:.2f} mi, "
        f"optimized {report.total_miles:.2f} mi, "
        f"saved {report.miles_saved:.2f} mi ({report.percent_reduction:.1f}%)"
    )
    print(
        f"crossovers {base_report.crossover_count} -> {report.crossover_count}, "
        f"customers assessed {catr_total(bau_log)} / {catr_total(opt_log)}"
    )
    return EXIT_OK


def cmd_solve_once(args) -> int:
    raw = json.loads(Path(args.snapshot).read_text(encoding="utf-8"))
    snapshot = validate_snapshot(raw)
    if args.config:
        cfg = load_config(args.config).planner_config()
    else:
        cfg = PlannerConfig()
    plan = plan_pipelines(snapshot, cfg, _offline_provider(args))
    if args.out:
        _write_json(Path(args.out), plan_to_doc(plan))
    print(
        f"snapshot {plan.snapshot_id}: runs={plan.runs_completed}"
        + (f" partial ({plan.error})" if plan.partial else "")
    )
    for crew_id in sorted(plan.pipelines):
        slots = plan.pipelines[crew_id]
        if not slots:
            print(f"  {crew_id}: (idle)")
            continue
        for pos, slot in enumerate(slots, start=1):
            mark = " [frozen]" if slot.frozen else ""
            print(f"  {crew_id}[{pos}] {slot.outage_id}{mark}  {slot.rationale}")
    return EXIT_RUNTIME if plan.partial else EXIT_OK


def cmd_serve(args) -> int:
    from .service import run_service

    cfg = load_config(args.config) if args.config else ServiceConfig()
    run_service(cfg)
    return EXIT_OK


# -- parser --------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="stormcrew", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic storm scenario")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--crews", type=int, default=7)
    p.add_argument("--outages", type=int, default=90)
    p.add_argument("--hours", type=float, default=6.0)
    p.add_argument("--fps-fraction", type=float, default=0.05)
    p.add_argument("--area-km", type=float, default=12.0)
    p.add_argument("--profile", choices=("front", "uniform"), default="front")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("replay", help="replay one scenario under one policy")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policy", choices=("bau", "opt"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--timing")
    p.add_argument("--cadence-minutes", type=float, default=15.0)
    p.add_argument("--offline-nodes")
    p.add_argument("--offline-matrix")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("compare", help="replay both arms and emit metrics")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cadence-minutes", type=float, default=15.0)
    p.add_argument("--offline-nodes")
    p.add_argument("--offline-matrix")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("solve-once", help="plan pipelines for a snapshot file")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--offline-nodes")
    p.add_argument("--offline-matrix")
    p.set_defaults(func=cmd_solve_once)

    p = sub.add_parser("serve", help="run the dispatch HTTP service")
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except _DATA_ERRORS as exc:
        print(f"{ERROR_PREFIX}[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StormcrewError as exc:
        print(f"{ERROR_PREFIX}[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"{ERROR_PREFIX}[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
