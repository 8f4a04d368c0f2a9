"""Command-line interface: `relay-sim run` and `relay-sim campaign`."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .sim import RunConfig, run, sweep_campaign
from .util import ConfigError, InvariantError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _base_config(args) -> RunConfig:
    return RunConfig(
        scenario_path=args.scenario[0] if isinstance(args.scenario, list) else args.scenario,
        relay_override=getattr(args, "relay", None),
        duration_s=args.duration,
        seed=getattr(args, "seed", 42),
        out_dir=getattr(args, "out", None),
        trace_packets=getattr(args, "trace_packets", False),
        traffic_rate_bps=args.rate_bps,
        l2sm_path=args.l2sm,
        mcs_path=args.mcs_table,
    )


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--duration", type=float, default=2.0, help="simulated seconds")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--rate-bps", type=float, default=None, help="CBR source rate")
    p.add_argument("--l2sm", type=str, default=None, help="L2SM override CSV")
    p.add_argument("--mcs-table", type=str, default=None, help="MCS table override CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relay-sim",
                                     description="IRS/AF relay link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--relay", type=str, default=None,
                       help="override: irs:60x120 | af:16x16:40 | none")
    p_run.add_argument("--seed", type=int, default=42)
    p_run.add_argument("--trace-packets", action="store_true",
                       help="also emit packets.csv")
    _add_common(p_run)

    p_camp = sub.add_parser("campaign", help="grid of runs over relay configs and seeds")
    p_camp.add_argument("--scenario", action="append", required=True,
                        help="scenario JSON file (repeatable)")
    p_camp.add_argument("--grid", required=True,
                        help="JSON file with a list of relay spec strings")
    p_camp.add_argument("--seeds", type=int, default=5,
                        help="number of seeds (0..n-1)")
    _add_common(p_camp)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            result = run(_base_config(args))
            for uid in sorted(result.per_ue):
                m = result.per_ue[uid]
                print(f"ue {uid}: throughput {m.throughput_bps / 1e6:.3f} Mbps, "
                      f"per {m.per if m.per is not None else 'n/a'}, "
                      f"sinr {m.sinr_mean_db if m.sinr_mean_db is not None else 'n/a'} dB")
            return EXIT_OK
        if args.command == "campaign":
            if args.out is None:
                raise ConfigError("campaign requires --out")
            grid_path = Path(args.grid)
            if not grid_path.exists():
                raise ConfigError(f"grid file not found: {grid_path}")
            try:
                grid = json.loads(grid_path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"grid file is not valid JSON: {exc}")
            if not isinstance(grid, list) or not all(isinstance(g, str) for g in grid):
                raise ConfigError("grid file must hold a JSON list of relay spec strings")
            base = _base_config(args)
            rows = sweep_campaign(base, args.scenario, grid,
                                  seeds=list(range(args.seeds)), out_dir=args.out)
            print(f"campaign complete: {len(rows)} runs -> {args.out}")
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
