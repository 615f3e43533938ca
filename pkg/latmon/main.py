import argparse
import sys
from typing import List, Optional

from latmon import __version__
from latmon.cli import register_commands
from latmon.core.config import settings
from latmon.core.logging import logger, set_log_level
from latmon.middleware.run_context import RunContextMiddleware
from latmon.utils.response import render_csv, render_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Lattice sums, monotonicity certificates and attractor-dimension bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    register_commands(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand and print its report on stdout.

    Returns:
        Exit code: 0 all assertions hold, 1 an assertion failed,
        2 usage or domain error, 3 numerical failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    set_log_level(args.log_level or settings.LOG_LEVEL)
    if args.cache_dir is None:
        args.cache_dir = settings.CACHE_DIR

    middleware = RunContextMiddleware(args.command, args.handler)
    report = middleware.dispatch(args)

    rendered = render_csv(report) if args.output == "csv" else render_json(report)
    sys.stdout.write(rendered if rendered.endswith("\n") else rendered + "\n")
    if report.exit_code:
        logger.info("%s exited with %d: %s", args.command, report.exit_code, report.message)
    return report.exit_code
