#!/usr/bin/env python3
"""
Main entry point for the rigged null hypersurface engine.
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from src.catalog import describe, list_scenarios
from src.errors import NullRigError
from src.runner import SUITES, CheckRunner


def parse_tolerances(items: List[str]) -> Dict[str, float]:
    """--tol check.id=value pairs."""
    tolerances = {}
    for item in items or []:
        check_id, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--tol expects <check>=<value>, got '{item}'")
        try:
            tolerances[check_id.strip()] = float(value)
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"--tol value for '{check_id}' is not a number: {value}") from e
    return tolerances


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Numerical checks on rigged null hypersurfaces")
    parser.add_argument("--log-level", default=os.getenv("NULLRIG_LOG_LEVEL", "WARNING"))
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run check suites on a scenario")
    run.add_argument("scenario", help="catalog name or path to a YAML/JSON scenario file")
    run.add_argument("--suites", default="all", help=f"comma-separated subset of {', '.join(SUITES)}, or 'all'")
    run.add_argument("--samples", type=int, default=int(os.getenv("NULLRIG_SAMPLES", "100")))
    run.add_argument("--seed", type=int, default=int(os.environ["NULLRIG_SEED"]) if os.getenv("NULLRIG_SEED") else None)
    run.add_argument("--tol", action="append", default=[], metavar="CHECK=VALUE")
    run.add_argument("--report", help="write the JSON report to this path")
    run.add_argument("--format", choices=("json", "text"), default=os.getenv("NULLRIG_FORMAT", "text"))
    run.add_argument("--timing", action="store_true", help="include wall time in the report")

    hunt = commands.add_parser("hunt", help="Search for periodic geodesics on a compact quotient")
    hunt.add_argument("scenario")
    hunt.add_argument("--levels", default="-1,0,1", help="comma-separated velocity component levels ('' for none)")
    hunt.add_argument("--period", type=float, default=1.0)
    hunt.add_argument("--budget", type=int, default=400)
    hunt.add_argument("--causal", choices=("timelike", "null", "spacelike"))
    hunt.add_argument("--report", help="write the orbit table as CSV to this path")

    commands.add_parser("list", help="List built-in scenarios")

    validate = commands.add_parser("validate", help="Validate a scenario")
    validate.add_argument("scenario")
    validate.add_argument("--samples", type=int, default=20)
    return parser


def _suites(value: str) -> Optional[List[str]]:
    if value in ("", "all"):
        return None
    return [s.strip() for s in value.split(",") if s.strip()]


def main(argv: Optional[List[str]] = None) -> int:
    """Dispatch a subcommand; the return value is the process exit status."""
    # Load environment variables
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    runner = CheckRunner(verbose=getattr(args, "format", "text") != "json")

    if args.command == "list":
        for name in list_scenarios():
            print(f"{name:30s} {describe(name)}")
        return 0

    if args.command == "validate":
        problems = runner.validate(args.scenario, samples=args.samples)
        if problems:
            print(f"Scenario '{args.scenario}' is invalid:")
            for problem in problems:
                print(f"  - {problem}")
            return 1
        print(f"Scenario '{args.scenario}' is valid")
        return 0

    try:
        runner.load_scenario(args.scenario)
    except NullRigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

    if args.command == "hunt":
        levels = [float(v) for v in args.levels.split(",") if v.strip()]
        try:
            table = runner.hunt(levels, period=args.period, budget=args.budget, causal=args.causal)
        except NullRigError as e:
            print(f"Error: {e}", file=sys.stderr)
            return 2
        print(table.to_string(index=False) if len(table) else "No grid cells.")
        if args.report:
            table.to_csv(args.report, index=False)
        return 0

    try:
        tolerances = parse_tolerances(args.tol)
        report = runner.run(_suites(args.suites), samples=args.samples, seed=args.seed, tolerances=tolerances)
    except (argparse.ArgumentTypeError, ValueError, NullRigError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(report.to_json(timing=args.timing))
    print(report.to_json(timing=args.timing) if args.format == "json" else report.to_text(timing=args.timing), end="")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
