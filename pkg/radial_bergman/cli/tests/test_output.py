import csv
import io

import pytest

from radial_bergman.cli.models import ReportDocument, ResultBlock
from radial_bergman.cli.output import OutputFormat, emit, render, render_csv, render_text


@pytest.fixture
def doc():
    return ReportDocument(
        tool_version="0.3.0",
        command=["condition", "dp"],
        generated_at="2024-05-01T12:00:00Z",
        results=[
            ResultBlock(
                kind="condition",
                title="Dp",
                values={"trend": "bounded", "sup_estimate": 1.25},
                columns=["index", "value"],
                rows=[[0.0, 1.0], [1.0, 1.25]],
                notes=["flat"],
            ),
            ResultBlock(kind="exp-classify", title="pair", values={"verdict": "bounded"}),
        ],
    )


def test_text(doc):
    text = render_text(doc)
    assert "== Dp ==" in text
    assert "trend         bounded" in text
    assert "note: flat" in text
    assert "radial-bergman 0.3.0  condition dp" in text


def test_csv_blocks(doc):
    text = render_csv(doc)
    assert text.startswith("# condition: Dp\nindex,value\n")
    assert "# exp-classify: pair\nkey,value\nverdict,bounded\n" in text


def test_csv_single_block_has_no_comment(doc):
    single = doc.copy(update={"results": doc.results[:1]})
    rows = list(csv.reader(io.StringIO(render_csv(single))))
    assert rows == [["index", "value"], ["0.0", "1.0"], ["1.0", "1.25"]]


def test_json_and_emit(doc, tmp_path):
    assert ReportDocument.parse_raw(render(doc, OutputFormat.json)) == doc
    stream = io.StringIO()
    emit(doc, "text", stream=stream)
    assert stream.getvalue() == render_text(doc)
    emit(doc, "csv", tmp_path / "out" / "r.csv")
    assert (tmp_path / "out" / "r.csv").read_text() == render_csv(doc)
