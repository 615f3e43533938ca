import json
import logging
import os
import sys
from contextvars import ContextVar
from typing import Optional

# Configuration
DEFAULT_LOG_LEVEL = os.getenv("LATMON_LOG_LEVEL", "INFO")
SERVICE_NAME = "latmon"

# Context variable carrying the run id of the current CLI invocation
run_id_context: ContextVar[Optional[str]] = ContextVar("run_id", default=None)


def _resolve_log_level(level: str) -> int:
    """Convert log level string to logging constant."""
    level_name = level.upper()
    return getattr(logging, level_name, logging.INFO)


class RunIDFilter(logging.Filter):
    """Filter to inject the run id into log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id_context.get() or "N/A"
        return True


class JSONFormatter(logging.Formatter):
    """One JSON object per line."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "run_id": getattr(record, "run_id", "N/A"),
            "service": SERVICE_NAME,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload)


def setup_logging(level: str = DEFAULT_LOG_LEVEL) -> logging.Logger:
    """
    Configure structured logging with run id support.

    Logs go to stderr; stdout is reserved for reports.

    Args:
        level: Logging level (default from environment or INFO)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(SERVICE_NAME)
    logger.setLevel(_resolve_log_level(level))
    logger.propagate = False

    # Prevent duplicate handlers on repeated imports
    if logger.handlers:
        return logger

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(_resolve_log_level(level))
    handler.setFormatter(JSONFormatter())
    handler.addFilter(RunIDFilter())

    logger.addHandler(handler)

    return logger


def set_log_level(level: str) -> None:
    """Change the level of the service logger and its handlers."""
    resolved = _resolve_log_level(level)
    logger.setLevel(resolved)
    for handler in logger.handlers:
        handler.setLevel(resolved)


def set_run_id(run_id: Optional[str]) -> None:
    """
    Set the run id for the current context.

    Args:
        run_id: The run id to set (None to clear)
    """
    if run_id is None:
        clear_run_id()
        return
    run_id_context.set(run_id)


def get_run_id() -> Optional[str]:
    """Get the run id from the current context."""
    return run_id_context.get()


def clear_run_id() -> None:
    """Reset the run id for the current context."""
    run_id_context.set(None)


# Global logger instance
logger = setup_logging()


__all__ = [
    "logger",
    "set_log_level",
    "set_run_id",
    "get_run_id",
    "clear_run_id",
]
