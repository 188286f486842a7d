"""Command-line entry point: ``photocorr run {sweep,error-scan,emission}``.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure. The output directory defaults to $PHOTOCORR_OUT_DIR, then ".".
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    CapacityError,
    DegenerateSteadyStateError,
    IntegrationError,
    PhotocorrError,
    SampleFailureError,
    SingularityError,
    ValidationError,
    ZeroIntensityError,
)
from .harness import run_emission_trace, run_error_scan, run_sweep

_NUMERICAL_ERRORS = (
    IntegrationError,
    DegenerateSteadyStateError,
    ZeroIntensityError,
    SampleFailureError,
    SingularityError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photocorr",
        description="Collective-emission photon statistics: sweeps, error scans, emission traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario config")
    run_sub = run.add_subparsers(dest="mode", required=True)
    for mode, help_txt in (
        ("sweep", "correlation value vs d/lambda for each requested method"),
        ("error-scan", "mean percentage error vs N for both sampling methods"),
        ("emission", "normalized emission rate traces R(t)/R(0)"),
    ):
        p = run_sub.add_parser(mode, help=help_txt)
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="sample work-pool size")
        p.add_argument("--out-dir", default=None, help="output directory (env PHOTOCORR_OUT_DIR)")
        p.add_argument(
            "--unsafe-dims",
            action="store_true",
            help="lift the exact-solver register limits (4^N scaling, use with care)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.mode == "sweep":
            result = run_sweep(
                args.config,
                out_dir=args.out_dir,
                seed=args.seed,
                threads=args.threads,
                allow_large=args.unsafe_dims,
            )
        elif args.mode == "error-scan":
            result = run_error_scan(
                args.config, out_dir=args.out_dir, seed=args.seed, threads=args.threads
            )
        else:
            result = run_emission_trace(
                args.config,
                out_dir=args.out_dir,
                seed=args.seed,
                threads=args.threads,
                allow_large=args.unsafe_dims,
            )
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, CapacityError, FileNotFoundError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except PhotocorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {result.csv_path} and {result.manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
