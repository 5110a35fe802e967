"""Rendering of report documents as text, CSV or JSON."""

import csv
import io
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional, TextIO, Union

from radial_bergman.cli.models import ReportDocument, ResultBlock

logger = logging.getLogger(__name__)


class OutputFormat(str, Enum):
    """Report renderings."""

    text = "text"
    csv = "csv"
    json = "json"


def _text_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_text_value(v)}" for k, v in value.items())
    if isinstance(value, list):
        return "[" + ", ".join(_text_value(v) for v in value) + "]"
    return str(value)


def _text_block(block: ResultBlock) -> List[str]:
    lines = [f"== {block.title} =="]
    width = max((len(k) for k in block.values), default=0)
    for key, value in block.values.items():
        lines.append(f"{key.ljust(width)}  {_text_value(value)}")
    if block.columns:
        cells = [[_text_value(c) for c in row] for row in block.rows]
        widths = [
            max([len(name)] + [len(row[i]) for row in cells])
            for i, name in enumerate(block.columns)
        ]
        lines.append("  ".join(n.rjust(w) for n, w in zip(block.columns, widths)))
        lines.extend(
            "  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells
        )
    lines.extend(f"note: {note}" for note in block.notes)
    return lines


def render_text(doc: ReportDocument) -> str:
    """Human-readable report: one section per result block."""
    lines = [
        f"{doc.tool} {doc.tool_version}  {' '.join(doc.command)}",
        f"generated {doc.generated_at} in {doc.elapsed_seconds:.3f}s",
    ]
    for block in doc.results:
        lines.append("")
        lines.extend(_text_block(block))
    return "\n".join(lines) + "\n"


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list)):
        return _text_value(value)
    return value


def render_csv(doc: ReportDocument) -> str:
    """Tables of every block; blocks without a table give key,value rows.

    With several blocks each table is preceded by a ``# kind: title`` line and
    followed by an empty line.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    several = len(doc.results) > 1
    for block in doc.results:
        if several:
            buffer.write(f"# {block.kind}: {block.title}\n")
        if block.columns:
            writer.writerow(block.columns)
            writer.writerows([_csv_cell(c) for c in row] for row in block.rows)
        else:
            writer.writerow(["key", "value"])
            writer.writerows([k, _csv_cell(v)] for k, v in block.values.items())
        if several:
            buffer.write("\n")
    return buffer.getvalue()


def render_json(doc: ReportDocument) -> str:
    """The document itself; `ReportDocument.parse_raw` reads it back."""
    return doc.json(indent=2) + "\n"


RENDERERS = {
    OutputFormat.text: render_text,
    OutputFormat.csv: render_csv,
    OutputFormat.json: render_json,
}


def render(doc: ReportDocument, fmt: Union[OutputFormat, str]) -> str:
    """Render `doc` in the requested format."""
    return RENDERERS[OutputFormat(fmt)](doc)


def emit(
    doc: ReportDocument,
    fmt: Union[OutputFormat, str],
    output: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """Write the rendered report to `output`, or to `stream` when no path is given."""
    text = render(doc, fmt)
    if output is None:
        (stream or sys.stdout).write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"report written to {path}")
