"""Figure rendering for the researcher report path.

Takes the wide aggregate table and writes summary figures next to the
delimited output: per-item answer distributions, time-to-answer means,
focus-loss counts, and per-asset stall totals. Only numeric columns are
plotted; text and image answers are skipped.
"""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .export import AggregateTable  # noqa: E402

_SAFE = re.compile(r"[^A-Za-z0-9_.-]+")


def _slug(name: str) -> str:
    return _SAFE.sub("_", name) or "column"


def _numeric(cells: list[str]) -> list[float]:
    out = []
    for cell in cells:
        try:
            out.append(float(cell))
        except ValueError:
            continue
    return out


def _column(table: AggregateTable, name: str) -> list[str]:
    idx = table.columns.index(name)
    return [row[idx] for row in table.rows]


def _bar(path: Path, labels: list[str], values: list[float],
         title: str, ylabel: str) -> None:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(labels) + 2), 3.2))
    ax.bar(range(len(values)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_title(title, fontsize=10)
    ax.set_ylabel(ylabel, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_figures(table: AggregateTable, out_dir: Path) -> list[Path]:
    """Write one PNG per plottable aspect of the table; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if not table.rows:
        return written

    session_labels = _column(table, "session_id")
    short_sessions = [s[:8] for s in session_labels]

    fixed = {"session_id", "participant_id", "status", "focus_lost_count"}
    item_cols = [c for c in table.columns
                 if c not in fixed and not c.startswith("time_to_answer_")
                 and not c.startswith("stall_ms_")]
    for col in item_cols:
        values = _numeric(_column(table, col))
        if not values:
            continue  # text or image answers: nothing to plot
        path = out_dir / f"answers_{_slug(col)}.png"
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        bins = min(20, max(3, len(set(values))))
        ax.hist(values, bins=bins, color="#4878a8", edgecolor="#223")
        ax.set_title(f"answers: {col}", fontsize=10)
        ax.set_xlabel("value", fontsize=9)
        ax.set_ylabel("sessions", fontsize=9)
        fig.tight_layout()
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    tta_cols = [c for c in table.columns if c.startswith("time_to_answer_")]
    means, labels = [], []
    for col in tta_cols:
        values = _numeric(_column(table, col))
        if values:
            labels.append(col.removeprefix("time_to_answer_"))
            means.append(sum(values) / len(values))
    if means:
        path = out_dir / "time_to_answer.png"
        _bar(path, labels, means, "mean time to answer", "ms")
        written.append(path)

    focus = _numeric(_column(table, "focus_lost_count"))
    if focus and any(focus):
        path = out_dir / "focus_lost.png"
        _bar(path, short_sessions, focus, "focus-lost events per session", "events")
        written.append(path)

    stall_cols = [c for c in table.columns if c.startswith("stall_ms_")]
    for col in stall_cols:
        values = _numeric(_column(table, col))
        if not values or not any(values):
            continue
        path = out_dir / f"{_slug(col)}.png"
        _bar(path, short_sessions, values,
             f"stall time: {col.removeprefix('stall_ms_')}", "ms")
        written.append(path)
    return written


def write_report(table: AggregateTable, out_dir: Path) -> tuple[Path, list[Path]]:
    """Aggregate CSV plus figures under out_dir; returns (csv, figures)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "aggregate.csv"
    csv_path.write_bytes(table.to_csv())
    figures = render_figures(table, out_dir / "figures")
    return csv_path, figures
