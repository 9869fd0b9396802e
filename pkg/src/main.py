"""
Main entry point for chaindrive

Usage:
    python src/main.py run <scenario-file> [--out DIR] [--seed S] [--omega-scale K]

Exit codes: 0 on success, 1 when the scenario cannot be parsed, 2 on any
other simulation failure.
"""

import argparse
import sys

from chaindrive.config import OUTPUT_CONFIG
from chaindrive.core.output import emit_csv, format_summary
from chaindrive.core.runner import apply_overrides, run_scenario
from chaindrive.core.scenario import parse_scenario
from chaindrive.exceptions import ChainDriveError, ParseError
from chaindrive.logger import get_logger, set_level

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaindrive", description="Driven spin-chain scenario runner")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario file and write CSV results")
    run.add_argument("scenario", help="Path to the scenario file")
    run.add_argument("--out", default=OUTPUT_CONFIG["output_dir"], help="Output directory")
    run.add_argument("--seed", type=int, default=None, help="Override the noise master seed")
    run.add_argument("--omega-scale", type=float, default=None,
                     help="Multiply the drive frequency (and amplitude) by this factor")
    return parser


def run_command(args) -> int:
    """Parse, run and emit one scenario; returns the process exit code."""
    logger = get_logger()
    try:
        with open(args.scenario, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        print(f"error: cannot read {args.scenario}: {e}", file=sys.stderr)
        return EXIT_PARSE
    except UnicodeDecodeError as e:
        print(f"error: {args.scenario}: not valid UTF-8 text ({e.reason} at byte {e.start})", file=sys.stderr)
        return EXIT_PARSE

    try:
        scenario = parse_scenario(text)
    except ParseError as e:
        print(f"error: {args.scenario}: {e}", file=sys.stderr)
        return EXIT_PARSE

    try:
        scenario = apply_overrides(scenario, seed=args.seed, omega_scale=args.omega_scale)
        records = run_scenario(scenario)
    except ChainDriveError as e:
        logger.error(f"Scenario '{scenario.name}' failed: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        paths = emit_csv(records, args.out, scenario)
    except ChainDriveError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(format_summary(records))
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    if args.command == "run":
        return run_command(args)
    return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
