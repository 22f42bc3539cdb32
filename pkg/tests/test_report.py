import random

from screenflow import export
from screenflow.report import render_figures, write_report

from .helpers import drive_session

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def make_table(demo_spec, demo_doc, n=3):
    rng = random.Random(7)
    docs = []
    for _ in range(n):
        session, _ = drive_session(demo_spec, demo_doc, rng, with_noise=True)
        docs.append(export.from_csv(export.to_csv(session)))
    return export.aggregate(docs)


def test_figures_written_as_png(tmp_path, demo_spec, demo_doc):
    table = make_table(demo_spec, demo_doc)
    paths = render_figures(table, tmp_path)
    assert paths, "expected at least one figure"
    for path in paths:
        assert path.exists()
        assert path.read_bytes()[:8] == PNG_MAGIC


def test_report_bundles_csv_and_figures(tmp_path, demo_spec, demo_doc):
    table = make_table(demo_spec, demo_doc)
    csv_path, figures = write_report(table, tmp_path / "out")
    assert csv_path.read_bytes() == table.to_csv()
    assert all(f.parent == tmp_path / "out" / "figures" for f in figures)


def test_empty_table_writes_csv_only(tmp_path):
    table = export.aggregate([])
    csv_path, figures = write_report(table, tmp_path / "empty")
    assert csv_path.exists()
    assert figures == []
