"""Command-line interface.

Subcommands: run, compare, sweep, estimate, snapshot-to-pgm.
Exit codes: 0 success, 2 configuration error, 3 numeric abort,
4 partial sweep (some members failed, partial results written).
"""

from __future__ import annotations

import argparse
import sys

from . import spectral
from .errors import (
    ConfigError,
    DomainTooSmallError,
    NumericsError,
    ResolutionError,
    UnphysicalStateError,
    WignerLabError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wignerlab",
        description="Phase-space dynamics laboratory for Wigner distributions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--parallel", type=int, default=1, metavar="N",
                       help="worker count (FFT workers for run/compare, processes for sweep)")
        p.add_argument("--verbose", action="store_true")

    common(sub.add_parser("run", help="single run: trajectory CSV plus snapshots"))
    common(sub.add_parser("compare", help="paired quantum/classical run with divergence metrics"))
    common(sub.add_parser("sweep", help="parameter sweep with summary and scaling fits"))

    est = sub.add_parser("estimate", help="closed-form timescale table from a scenario file")
    est.add_argument("--config", required=True, help="path to the scenario file")
    est.add_argument("--out", default=None, help="optional directory for estimates.csv")
    est.add_argument("--parallel", type=int, default=1, help=argparse.SUPPRESS)
    est.add_argument("--verbose", action="store_true")

    pgm = sub.add_parser("snapshot-to-pgm", help="render a .wig snapshot as a 16-bit PGM heatmap")
    pgm.add_argument("snapshot", help="path to the .wig snapshot")
    pgm.add_argument("--out", default=None, help="output .pgm path (default: alongside input)")
    return parser


def _cmd_run(args) -> int:
    from .config import load_run_config
    from .runner import run

    spectral.set_workers(args.parallel)
    config = load_run_config(args.config)
    run(config, args.out, verbose=args.verbose)
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .config import load_run_config
    from .runner import compare

    spectral.set_workers(args.parallel)
    config = load_run_config(args.config)
    result = compare(config, args.out, verbose=args.verbose)
    if args.verbose:
        for key, b in result.breakdown.items():
            state = "reached" if b.reached else "not reached"
            print(f"breakdown[{key}]: {state} at t = {b.time:.6g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .config import load_sweep_config
    from .runner import PartialSweepError, sweep

    config = load_sweep_config(args.config)
    try:
        result = sweep(config, args.out, parallel=args.parallel, verbose=args.verbose)
    except PartialSweepError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARTIAL
    if args.verbose:
        print(result.fit_report, end="")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    import os

    from .config import load_scenario
    from .estimators import hyperion_report

    scenario, ref_years, ref_log = load_scenario(args.config)
    report = hyperion_report(scenario, reference_t_r_years=ref_years, reference_log_ratio=ref_log)
    print(report.to_text())
    csv_lines = (
        "scenario,action_Js,log_action_ratio,t_r_seconds,t_r_years\n"
        f"{report.scenario_name},{report.action!r},{report.log_action_ratio!r},"
        f"{report.t_r_seconds!r},{report.t_r_years!r}\n"
    )
    print()
    print(csv_lines, end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "estimates.csv")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(csv_lines)
        if args.verbose:
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_snapshot_to_pgm(args) -> int:
    from .snapshots import load_snapshot, write_pgm

    field, _ = load_snapshot(args.snapshot)
    out = args.out
    if out is None:
        out = args.snapshot[:-4] + ".pgm" if args.snapshot.endswith(".wig") else args.snapshot + ".pgm"
    write_pgm(field, out)
    print(f"wrote {out}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "estimate": _cmd_estimate,
    "snapshot-to-pgm": _cmd_snapshot_to_pgm,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, UnphysicalStateError, DomainTooSmallError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, ResolutionError) as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WignerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
