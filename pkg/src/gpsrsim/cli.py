"""Command-line interface: single simulation runs and the experiment sweep."""

from __future__ import annotations

import argparse
import os
import sys

from .core import ConfigError, SimConfig, load_config, parse_area, validate_config
from .engine import EngineError, run_simulation
from .experiments import CSV_HEADER, MetricsError, SweepError, run_row, run_sweep


def _base_config(path: str | None) -> SimConfig:
    if path:
        return load_config(path)
    return SimConfig()


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    if args.protocol is not None:
        cfg.protocol = args.protocol
    if args.nodes is not None:
        cfg.nodes = args.nodes
    if args.area is not None:
        cfg.area_m = parse_area(args.area)
    if args.malicious is not None:
        cfg.malicious = args.malicious
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_simulate(args) -> int:
    cfg = validate_config(_apply_overrides(_base_config(args.config), args))
    record = run_simulation(cfg, trace=args.trace is not None)
    if args.trace is not None:
        _write(args.trace, "\n".join(record.trace_lines) + "\n")
    _write(args.out, CSV_HEADER + "\n" + run_row(record) + "\n")
    return 0


def cmd_sweep(args) -> int:
    cfg = validate_config(_base_config(args.config))
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    csv_text, _ = run_sweep(cfg, n_seeds=args.seeds, jobs=jobs)
    _write(args.out, csv_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpsr-sim",
        description="Simulate GPSR / S-GPSR sensor networks under "
                    "sinkhole and selective-forwarding attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation, emit one CSV row")
    sim.add_argument("--protocol", choices=("gpsr", "sgpsr"))
    sim.add_argument("--nodes", type=int)
    sim.add_argument("--area", help="square side in meters, or WxH")
    sim.add_argument("--malicious", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--config", help="key-value config file")
    sim.add_argument("--trace", metavar="FILE", help="write the event trace here")
    sim.add_argument("--out", metavar="FILE", help="CSV output (default stdout)")
    sim.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("sweep", help="run the full experiment grid")
    sweep.add_argument("--config", help="key-value config file for the base run")
    sweep.add_argument("--seeds", type=int, default=10,
                       help="replications per grid cell (default 10)")
    sweep.add_argument("--jobs", type=int, default=0,
                       help="parallel workers (default: all cores)")
    sweep.add_argument("--out", metavar="FILE", help="CSV output (default stdout)")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except (EngineError, MetricsError, SweepError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
