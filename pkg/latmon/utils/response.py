import csv
import io
import json
import math
from typing import Any, Dict, Optional

from latmon.schemas.report import ResultRecord, RunReport

CSV_COLUMNS = ("record", "kind", "value", "reference", "error_bound", "passed", "detail")


def success_report(
    command: str,
    message: str,
    parameters: Optional[Dict[str, Any]] = None,
) -> RunReport:
    """
    Returns an empty success report for a command to fill with records.

    Args:
        command: Subcommand name
        message: Summary line
        parameters: Echo of the resolved inputs (defaults to empty dict)

    Returns:
        RunReport: status success, exit code settled by the caller
    """
    return RunReport(command=command, message=message, parameters=parameters or {})


def fail_report(
    command: str,
    exit_code: int,
    message: str,
    parameters: Optional[Dict[str, Any]] = None,
    context: Optional[Dict[str, Any]] = None,
) -> RunReport:
    """
    Returns a failure report.

    Args:
        command: Subcommand name
        exit_code: Process exit code (2 usage/domain, 3 numerics)
        message: Error message
        parameters: Echo of the inputs that were parsed
        context: Additional error context (defaults to empty dict)

    Returns:
        RunReport: status failure with the error payload, repeated as a single
        ``error`` record so that CSV output carries it too
    """
    error = _jsonable(context or {})
    record = ResultRecord(
        record="error", kind="error", passed=False, detail=f"{message}: {json.dumps(error, sort_keys=True)}"
    )
    return RunReport(
        status="failure",
        exit_code=exit_code,
        command=command,
        message=message,
        parameters=parameters or {},
        records=[record],
        error=error,
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g") if math.isfinite(value) else str(value)
    return str(value)


def render_json(report: RunReport) -> str:
    return report.model_dump_json(indent=2)


def render_csv(report: RunReport) -> str:
    """Header plus one row per record; floats with 17 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.records:
        writer.writerow(_format_cell(getattr(row, column)) for column in CSV_COLUMNS)
    return buffer.getvalue()
