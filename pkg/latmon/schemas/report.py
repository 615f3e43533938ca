from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from latmon import __version__

RecordKind = Literal[
    "method", "agreement", "bound", "check", "constant", "certificate", "parameter", "q_table", "fuzz", "error"
]


class ResultRecord(BaseModel):
    """One row of a run report"""
    record: str
    kind: RecordKind
    value: Optional[float] = None
    reference: Optional[float] = None
    error_bound: Optional[float] = None
    passed: Optional[bool] = None
    detail: Optional[str] = None


class RunReport(BaseModel):
    """Machine-readable result of one CLI command"""
    status: Literal["success", "failure"] = "success"
    exit_code: int = 0
    message: str = ""
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    records: List[ResultRecord] = Field(default_factory=list)
    seeds: List[int] = Field(default_factory=list)
    wall_time_s: float = 0.0
    version: str = __version__
    run_id: Optional[str] = None
    started_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    error: Dict[str, Any] = Field(default_factory=dict)

    model_config = {
        "json_schema_extra": {
            "example": {
                "status": "success",
                "exit_code": 0,
                "message": "latsum completed",
                "command": "latsum",
                "parameters": {"dim": 2, "p": 2.0, "m": 1.0, "method": "all"},
                "records": [
                    {
                        "record": "direct",
                        "kind": "method",
                        "value": 0.8,
                        "reference": 1.0,
                        "error_bound": 1e-12,
                        "passed": True,
                    }
                ],
                "seeds": [],
                "wall_time_s": 0.4,
                "version": "0.1.0",
            }
        }
    }

    def add(self, record: str, kind: RecordKind, **fields: Any) -> ResultRecord:
        row = ResultRecord(record=record, kind=kind, **fields)
        self.records.append(row)
        return row

    def outcome_code(self) -> int:
        """1 if a mathematical assertion failed, 3 if two methods disagree, else 0."""
        failed = [row for row in self.records if row.passed is False]
        if any(row.kind == "agreement" for row in failed):
            return 3
        return 1 if failed else 0
