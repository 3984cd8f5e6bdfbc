"""Command-line entry points: run, serve, metrics."""

from __future__ import annotations

import argparse
import json
import sys

from .bridge import runner
from .bridge.metrics import REPORTERS, MetricsError, sweep_report
from .bridge.server import serve as serve_session


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mavctl", description="Inspection MAV control stack")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a mission script headlessly")
    run.add_argument("--world", required=True, help="world JSON file")
    run.add_argument("--script", required=True, help="mission script JSON file")
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--fast", action="store_true", help="run decoupled from wall clock")
    run.add_argument("--out", required=True, help="output directory for the run log")
    run.add_argument("--config", default=None, help="run configuration JSON file")

    srv = sub.add_parser("serve", help="run the vehicle behind an operator socket")
    srv.add_argument("--world", required=True)
    srv.add_argument("--seed", type=int, required=True)
    srv.add_argument("--port", type=int, required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--config", default=None)
    srv.add_argument("--start", default=None, help="spawn pose as x,y,yaw")

    met = sub.add_parser("metrics", help="extract a metric report from a run log")
    met.add_argument("kind", choices=sorted(REPORTERS))
    met.add_argument("--log", required=True, help="run directory or run.csv path")
    met.add_argument("--world", default=None, help="world file for geometric checks (sweep)")
    met.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        result = runner.run_headless(
            args.world, args.script, args.seed, args.out,
            fast=args.fast, config_path=args.config,
        )
        if result.reason:
            print(f"run finished: {result.reason}", file=sys.stderr)
        print(
            f"exit={result.exit_code} control_ticks={result.control_ticks} "
            f"sim_s={result.sim_seconds:.2f} out={result.out_dir}"
        )
        return result.exit_code

    if args.command == "serve":
        start = (0.0, 0.0, 0.0)
        if args.start:
            parts = [float(p) for p in args.start.split(",")]
            if len(parts) != 3:
                print("--start expects x,y,yaw", file=sys.stderr)
                return 2
            start = (parts[0], parts[1], parts[2])
        serve_session(
            args.world, args.seed, args.port,
            host=args.host, config_path=args.config, start=start,
        )
        return 0

    try:
        if args.kind == "sweep":
            report = sweep_report(args.log, world_path=args.world)
        else:
            report = REPORTERS[args.kind](args.log)
    except MetricsError as e:
        print(f"metrics: {e}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
