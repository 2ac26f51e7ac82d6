from __future__ import annotations

import argparse
import logging
import sys
import time

from .outputs import read_metrics, write_outputs
from .runner import run_scenario
from .scenario import BUNDLED, ScenarioError, load_scenario


def _cmd_run(args):
    spec = load_scenario(args.scenario)
    started = time.perf_counter()
    artifacts = run_scenario(spec, seed=args.seed, duration_ms=args.duration_ms,
                             keep_slot_log=args.slot_log)
    elapsed = time.perf_counter() - started
    paths = write_outputs(artifacts, args.out, slot_log=args.slot_log, figures=args.figures)
    s = artifacts.summary
    print(f"{spec.name}: {s['duration_ms']} ms simulated in {elapsed:.2f} s, "
          f"{s['handover_count']} handover(s)")
    for h in s["handovers"]:
        print(f"  t={h['time_ms'] / 1000:.1f}s UE{h['ue_id']} DU{h['source_du']} -> DU{h['target_du']}")
    for p in paths:
        print(f"  wrote {p}")


def _cmd_validate(args):
    spec = load_scenario(args.scenario)
    print(f"{spec.name}: {len(spec.cells)} cell(s), {len(spec.ues)} UE(s), "
          f"home DU {spec.xapp.home_du}, {spec.duration_ms} ms")


def _cmd_report(args):
    from .figures import render_dashboard
    du_rows, ue_rows, thresholds = read_metrics(args.out)
    for p in render_dashboard(du_rows, ue_rows, thresholds, args.out, fmt=args.format):
        print(f"wrote {p}")


def build_parser():
    parser = argparse.ArgumentParser(prog="oran-mlb", description="O-RAN MLB closed-loop testbench")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scenario_help = f"scenario file, or a bundled name ({', '.join(BUNDLED)})"
    run = sub.add_parser("run", help="run a scenario and write metrics")
    run.add_argument("--scenario", required=True, help=scenario_help)
    run.add_argument("--duration-ms", type=int, default=None, help="override scenario duration")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--slot-log", action="store_true", help="also write slot_log.csv")
    run.add_argument("--figures", action="store_true", help="also render dashboard.png")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="parse and check a scenario")
    val.add_argument("--scenario", required=True, help=scenario_help)
    val.set_defaults(func=_cmd_validate)

    rep = sub.add_parser("report", help="render figures from an existing run directory")
    rep.add_argument("--out", required=True, help="run output directory")
    rep.add_argument("--format", default="png", choices=("png", "pdf", "svg"))
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ScenarioError as exc:
        print(f"error: scenario: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
