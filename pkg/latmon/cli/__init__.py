import argparse

from latmon.cli.commands import COMMANDS


def common_options() -> argparse.ArgumentParser:
    """Output and runtime flags shared by every subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    output = parent.add_mutually_exclusive_group()
    output.add_argument("--json", dest="output", action="store_const", const="json", help="JSON report (default)")
    output.add_argument("--csv", dest="output", action="store_const", const="csv", help="One CSV row per record")
    parent.set_defaults(output="json")
    parent.add_argument("--cache-dir", default=None, help="Directory of binary shell-table caches")
    parent.add_argument("--log-level", default=None, help="Override LATMON_LOG_LEVEL for this run")
    return parent


def register_commands(subparsers) -> None:
    parents = [common_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
