"""Command-line entry point: ``soundrange solve | demo-appendix | selftest``."""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, ContractError, SolverError
from .harness import appendix_scenario, load_scenario, run
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _emit(record, args) -> int:
    print(record.summary())
    if args.trace:
        record.write_trace(args.trace)
    if args.json_report:
        record.write_json(args.json_report)
    return EXIT_OK if record.status in ("precision_reached", "budget", "resolution_limit", "family_exhausted") else EXIT_SOLVER


def _solve(scenario, args) -> int:
    try:
        record = run(scenario, workers=args.workers)
    except (ConfigError, ContractError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return _emit(record, args)


def cmd_solve(args) -> int:
    try:
        scenario = load_scenario(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _solve(scenario, args)


def cmd_demo(args) -> int:
    return _solve(appendix_scenario(args.seed), args)


def cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest(args.seed) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soundrange", description="Sound-ranging source localisation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-level progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--trace", help="write per-iteration trace lines here")
        p.add_argument("--json-report", help="write the run record as JSON here")
        p.add_argument("--workers", type=int, default=None, help="threads for defect evaluation")

    p = sub.add_parser("solve", help="solve the scenario in a config file")
    p.add_argument("--config", required=True)
    outputs(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("demo-appendix", help="m=2, p=5.6789, 64 random sensors, delta=0.1")
    p.add_argument("--seed", type=int, default=1)
    outputs(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("selftest", help="run the randomized invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
