"""Report document written by every subcommand."""

import math
from enum import Enum
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, validator

from radial_bergman.types.rfc3339 import rfc3339_str_to_datetime

SCHEMA_VERSION = "1.0"
TOOL_NAME = "radial-bergman"


def jsonable(value: Any) -> Any:
    """Plain JSON value; non-finite floats become the strings inf, -inf and nan."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in value]
    return value


class ResultBlock(BaseModel):
    """One result: scalar values and an optional table.

    Attributes:
        kind: what produced the block (``moments``, ``class``, ``condition`` ...).
        title: human-readable subject.
        values: verdicts, constants and other scalars.
        columns: column names of `rows`, in a fixed order per kind.
        rows: table rows.
        notes: free-form remarks.
    """

    kind: str
    title: str
    values: Dict[str, Any] = {}
    columns: List[str] = []
    rows: List[List[Any]] = []
    notes: List[str] = []

    @validator("values", pre=True)
    def plain_values(cls, v: Dict[str, Any]) -> Dict[str, Any]:
        """Store values as plain JSON."""
        return jsonable(v)

    @validator("rows", pre=True)
    def plain_rows(cls, v: List[List[Any]]) -> List[List[Any]]:
        """Store rows as plain JSON."""
        return jsonable(v)

    @validator("rows")
    def rows_match_columns(cls, v: List[List[Any]], values: Dict[str, Any]):
        """Every row has one entry per column."""
        width = len(values.get("columns", []))
        for row in v:
            if len(row) != width:
                raise ValueError(f"row {row} does not have {width} entries")
        return v


class ReportDocument(BaseModel):
    """Everything a run produced, with the context needed to reproduce it.

    Attributes:
        schema_version: version of this layout.
        tool: tool name.
        tool_version: version of the command-line package.
        command: the argument vector, without the program name.
        generated_at: RFC 3339 timestamp of the run.
        elapsed_seconds: wall-clock duration of the run.
        settings: snapshot of the numerical settings in force.
        results: result blocks in the order they were computed.
    """

    schema_version: str = SCHEMA_VERSION
    tool: str = TOOL_NAME
    tool_version: str
    command: List[str]
    generated_at: str
    elapsed_seconds: float = 0.0
    settings: Dict[str, Any] = {}
    results: List[ResultBlock] = []

    @validator("generated_at")
    def rfc3339(cls, v: str) -> str:
        """The timestamp must be RFC 3339."""
        rfc3339_str_to_datetime(v)
        return v

    @validator("settings", pre=True)
    def plain_settings(cls, v: Dict[str, Any]) -> Dict[str, Any]:
        """Store settings as plain JSON."""
        return jsonable(v)
