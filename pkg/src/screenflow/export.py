"""CSV serialization of sessions, salvage parsing, and wide aggregation.

Canonical record format is tall: one row per answer, per event, and per
session metadatum, under the fixed header

    session_id,participant_id,spec_id,spec_version,kind,key,value,t_ms

Dialect: comma delimiter, double-quote quoting with quote doubling, LF row
terminator, UTF-8, no trailing blank row beyond the final LF. A cell is
quoted exactly when it contains a comma, a double quote, CR, or LF (CR is
quoted even though the row terminator is LF alone, so that round-trips
survive adversarial strings). Image answers embed their data: URI in the
value cell, unchunked.

Structured cell values (answers, event payloads) are canonical JSON:
sorted keys, no spaces, UTF-8 without ASCII escaping.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import capture, engine
from .capture import BehavioralEvent, fold_media_stats

HEADER = ("session_id", "participant_id", "spec_id", "spec_version",
          "kind", "key", "value", "t_ms")

ROW_KINDS = ("answer", "event", "meta")

Row = tuple[str, str, str, str, str, str, str, str]


class ExportError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RowProblem:
    line: int
    code: str
    message: str


@dataclass
class ExportDocument:
    rows: list[Row] = field(default_factory=list)
    problems: list[RowProblem] = field(default_factory=list)

    def session_ids(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row[0] not in seen:
                seen.append(row[0])
        return seen


def canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False)


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _cell(value: str) -> str:
    if any(c in value for c in ',"\r\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def write_rows(rows: list[tuple[str, ...]]) -> bytes:
    lines = [",".join(_cell(c) for c in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def session_rows(session: engine.Session) -> list[Row]:
    """The tall rows for one session: meta, then answers, then events."""
    base = (session.session_id, session.participant_id,
            session.spec.spec_id, session.spec.version)
    rows: list[Row] = [
        base + ("meta", "seed", str(session.seed), ""),
        base + ("meta", "status", session.status, ""),
        base + ("meta", "started_wallclock_ms", str(session.started_wallclock_ms), ""),
    ]
    for item in session.spec.items():
        value = session.answers.get(item.item_id)
        if value is None:
            continue
        doc = engine.answer_to_json(value)
        doc["revisions"] = session.revisions.get(item.item_id, 1)
        rows.append(base + ("answer", item.item_id, canonical_json(doc),
                            str(session.answer_times.get(item.item_id, 0))))
    for ev in session.events:
        rows.append(base + ("event", ev.kind,
                            canonical_json({"payload": dict(ev.payload),
                                            "flags": sorted(ev.flags)}),
                            str(ev.t)))
    return rows


def to_csv(session: engine.Session) -> bytes:
    return write_rows([HEADER] + session_rows(session))


# ---------------------------------------------------------------------------
# Reading (salvage mode: damage is reported per row, never fatal)
# ---------------------------------------------------------------------------

def from_csv(data: bytes | str) -> ExportDocument:
    """Parse a tall CSV document back into rows.

    Raises ExportError(BAD_HEADER) when the fixed header is absent;
    anything wrong with an individual row becomes a RowProblem and parsing
    continues with the remaining rows.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExportError("BAD_HEADER",
                              f"document is not valid UTF-8: {exc}") from None
    else:
        text = data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ExportError("BAD_HEADER", "empty document") from None
    except csv.Error as exc:
        raise ExportError("BAD_HEADER", f"unreadable first row: {exc}") from None
    if tuple(header) != HEADER:
        raise ExportError("BAD_HEADER",
                          f"expected header {','.join(HEADER)!r}")
    doc = ExportDocument()
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            doc.problems.append(RowProblem(reader.line_num, "MALFORMED_ROW", str(exc)))
            continue
        if not row:
            continue  # stray blank line
        if len(row) != len(HEADER):
            doc.problems.append(RowProblem(
                reader.line_num, "MALFORMED_ROW",
                f"expected {len(HEADER)} columns, found {len(row)}"))
            continue
        if row[4] not in ROW_KINDS:
            doc.problems.append(RowProblem(
                reader.line_num, "MALFORMED_ROW",
                f"unknown row kind {row[4]!r}"))
            continue
        doc.rows.append(tuple(row))  # type: ignore[arg-type]
    return doc


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

@dataclass
class AggregateTable:
    columns: list[str]
    rows: list[list[str]]

    def to_csv(self) -> bytes:
        return write_rows([tuple(self.columns)] + [tuple(r) for r in self.rows])


def _display_value(doc: dict) -> str:
    kind = doc.get("type")
    if kind == "category":
        return str(doc.get("index", ""))
    if kind == "continuous":
        return str(doc.get("value", ""))
    if kind == "text":
        return str(doc.get("text", ""))
    if kind == "image":
        return str(doc.get("data_uri", ""))
    return ""


def _time_to_answer_ms(rows: list[Row], item_id: str) -> int | None:
    # Recomputed from the rows alone (not via the engine helper, which the
    # test suite uses as an independent cross-check).
    event_rows = [r for r in rows if r[4] == "event"]
    for idx, row in enumerate(event_rows):
        if row[5] != "answer-changed":
            continue
        try:
            payload = json.loads(row[6]).get("payload", {})
        except ValueError:
            continue
        if payload.get("item_id") != item_id:
            continue
        screen_id = payload.get("screen_id")
        shown: int | None = None
        for prior in event_rows[:idx]:
            if prior[5] != "screen-shown":
                continue
            try:
                prior_payload = json.loads(prior[6]).get("payload", {})
            except ValueError:
                continue
            if prior_payload.get("screen_id") == screen_id:
                try:
                    shown = int(prior[7])
                except ValueError:
                    shown = None
        if shown is None:
            return None
        try:
            return int(row[7]) - shown
        except ValueError:
            return None
    return None


def _events_of(rows: list[Row]) -> list[BehavioralEvent]:
    events = []
    for row in rows:
        if row[4] != "event":
            continue
        try:
            doc = json.loads(row[6])
            events.append(BehavioralEvent(
                row[5], int(row[7]), dict(doc.get("payload", {})),
                frozenset(doc.get("flags", []))))
        except (ValueError, KeyError, TypeError):
            continue  # salvage: skip undecodable events
    return events


def aggregate(docs: list[ExportDocument]) -> AggregateTable:
    """One row per session, one column per item, plus derived columns.

    Derived: time_to_answer_<item> (ms, from the event log alone),
    focus_lost_count, and stall_ms_<asset> per media asset. Sessions
    missing an answer get an empty cell. All documents must come from the
    same spec_id/version; anything else raises MIXED_SPECS.
    """
    by_session: dict[str, list[Row]] = {}
    specs = set()
    for doc in docs:
        for row in doc.rows:
            specs.add((row[2], row[3]))
            by_session.setdefault(row[0], []).append(row)
    if len(specs) > 1:
        detail = ", ".join(f"{s}/{v}" for s, v in sorted(specs))
        raise ExportError("MIXED_SPECS",
                          f"documents span multiple specs: {detail}")

    item_ids: set[str] = set()
    asset_ids: set[str] = set()
    per_session_events: dict[str, list[BehavioralEvent]] = {}
    for sid, rows in by_session.items():
        events = _events_of(rows)
        per_session_events[sid] = events
        item_ids.update(row[5] for row in rows if row[4] == "answer")
        asset_ids.update(capture.iter_media_assets(events))

    items = sorted(item_ids)
    assets = sorted(asset_ids)
    columns = (["session_id", "participant_id", "status"]
               + items
               + [f"time_to_answer_{i}" for i in items]
               + ["focus_lost_count"]
               + [f"stall_ms_{a}" for a in assets])

    out_rows = []
    for sid, rows in by_session.items():
        participant = rows[0][1]
        status = next((r[6] for r in rows if r[4] == "meta" and r[5] == "status"), "")
        answers: dict[str, str] = {}
        for row in rows:
            if row[4] != "answer":
                continue
            try:
                answers[row[5]] = _display_value(json.loads(row[6]))
            except ValueError:
                answers[row[5]] = ""
        events = per_session_events[sid]
        cells = [sid, participant, status]
        cells += [answers.get(i, "") for i in items]
        for i in items:
            tta = _time_to_answer_ms(rows, i)
            cells.append("" if tta is None else str(tta))
        cells.append(str(sum(1 for ev in events if ev.kind == "focus-lost")))
        for a in assets:
            cells.append(str(fold_media_stats(events, a).total_stall_ms))
        out_rows.append(cells)

    out_rows.sort(key=lambda r: (r[1], r[0]))
    return AggregateTable(columns, out_rows)
