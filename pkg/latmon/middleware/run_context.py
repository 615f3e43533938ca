import argparse
import time
import uuid
from typing import Any, Callable, Dict

from pydantic import ValidationError

from latmon.core.exceptions import LatmonError
from latmon.core.logging import clear_run_id, logger, set_run_id
from latmon.schemas.report import RunReport
from latmon.utils.response import fail_report

CommandHandler = Callable[[argparse.Namespace], RunReport]

# Namespace attributes that are plumbing rather than inputs
_HIDDEN_ARGS = ("handler", "command")


class RunContextMiddleware:
    """
    Wraps a command handler for run tracing and the exit-code contract.

    Each run:
    - gets a fresh run id in the logging context
    - logs start and finish with wall time
    - turns LatmonError and pydantic ValidationError into failure reports
    - clears the run id afterwards
    """

    def __init__(self, command: str, handler: CommandHandler):
        """
        Args:
            command: Subcommand name echoed into the report
            handler: Function building the report from parsed arguments
        """
        self.command = command
        self.handler = handler

    def parameters(self, args: argparse.Namespace) -> Dict[str, Any]:
        return {k: v for k, v in vars(args).items() if k not in _HIDDEN_ARGS}

    def dispatch(self, args: argparse.Namespace) -> RunReport:
        run_id = str(uuid.uuid4())
        set_run_id(run_id)
        parameters = self.parameters(args)
        logger.info("Starting %s with %s", self.command, parameters)
        started = time.perf_counter()

        try:
            report = self.handler(args)
            report.parameters = report.parameters or parameters
            report.exit_code = report.outcome_code()
            if report.exit_code:
                report.status = "failure"
            logger.info("Completed %s with exit code %d", self.command, report.exit_code)

        except LatmonError as e:
            logger.error("%s failed: %s", self.command, e.message)
            report = fail_report(self.command, e.exit_code, e.message, parameters, e.context)

        except ValidationError as e:
            errors = [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()]
            logger.error("%s rejected its parameters: %s", self.command, errors)
            report = fail_report(self.command, 2, "invalid parameters", parameters, {"errors": errors})

        except Exception as e:
            logger.error("Unexpected error in %s: %s", self.command, str(e), exc_info=True)
            report = fail_report(self.command, 3, "internal error", parameters, {"error": str(e)})

        finally:
            clear_run_id()

        report.run_id = run_id
        report.wall_time_s = time.perf_counter() - started
        return report
