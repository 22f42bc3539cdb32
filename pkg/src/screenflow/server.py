"""Distribution and collection service.

Serves per-participant questionnaires selected by experimental progress,
accepts idempotent result uploads, aggregates stored results, hosts the
browser UI bundle, and upgrades /sync/ connections to the multi-device
coordinator. Storage is an append-only directory: one content-addressed
file per stored result plus a journaled index, each durably flushed before
a receipt is returned; no database involved, so the data directory can be
archived as-is.

Endpoints:
    GET  /questionnaire?participant=ID     next questionnaire + preload list
    POST /results?participant=ID&spec=DIG  CSV upload -> receipt (idempotent)
    GET  /results?participant=ID           receipts so far
    GET  /export.csv[?spec_id=&spec_version=]  wide aggregate of all uploads
    GET  /scales/{variant}.svg             built-in scale artwork
    GET  /assets/...  /app/...             media assets and UI bundle
    WS   /sync/{group}                     synchronization protocol

Plan file (JSON): {"participants": {"p1": ["day1.json", "day2.json"]}},
spec paths relative to the plan file.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import export, qspec, scales, sync

DEFAULT_MAX_PAYLOAD = 32 * 1024 * 1024


class StorageError(Exception):
    pass


@dataclass
class ServerConfig:
    data_dir: Path
    plan_file: Path | None = None
    assets_dir: Path | None = None
    ui_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8080
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD


def load_config(path: Path) -> ServerConfig:
    doc = json.loads(Path(path).read_text("utf-8"))
    base = Path(path).resolve().parent

    def _path(key: str) -> Path | None:
        return (base / doc[key]) if key in doc and doc[key] else None

    data_dir = _path("data_dir")
    if data_dir is None:
        raise ValueError("config needs a data_dir")
    return ServerConfig(
        data_dir=data_dir,
        plan_file=_path("plan_file"),
        assets_dir=_path("assets_dir"),
        ui_dir=_path("ui_dir"),
        host=doc.get("host", "127.0.0.1"),
        port=int(doc.get("port", 8080)),
        max_payload_bytes=int(doc.get("max_payload_bytes", DEFAULT_MAX_PAYLOAD)),
    )


# ---------------------------------------------------------------------------
# Storage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StoredResult:
    participant_id: str
    spec_digest: str
    content_digest: str
    completed: bool
    salvaged_rows: int
    received_ms: int

    @property
    def receipt_id(self) -> str:
        raw = f"{self.participant_id}\x00{self.spec_digest}\x00{self.content_digest}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:32]

    def receipt(self) -> dict:
        # Deterministic: a duplicate upload gets the byte-identical receipt.
        return {
            "receipt_id": self.receipt_id,
            "participant": self.participant_id,
            "spec_digest": self.spec_digest,
            "content_digest": self.content_digest,
            "completed": self.completed,
            "salvaged_rows": self.salvaged_rows,
        }


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class ResultStore:
    """Append-only result storage with an upload journal.

    A result file lands via write-to-temp + atomic rename, both fsynced,
    and only then is the journal line appended and fsynced; the receipt is
    returned after that. A crash in between leaves an orphan file that was
    never receipted, which replay ignores, so receipt implies re-readable.
    """

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.results_dir = self.data_dir / "results"
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.data_dir / "journal.jsonl"
        self._lock = threading.Lock()
        self._index: dict[tuple[str, str, str], StoredResult] = {}
        self._order: list[StoredResult] = []
        self._replay()

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        for line in self.journal_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            record = StoredResult(
                doc["participant_id"], doc["spec_digest"], doc["content_digest"],
                doc["completed"], doc["salvaged_rows"], doc["received_ms"])
            key = (record.participant_id, record.spec_digest, record.content_digest)
            if key not in self._index:
                self._index[key] = record
                self._order.append(record)

    def _result_path(self, content_digest: str) -> Path:
        return self.results_dir / f"{content_digest}.csv"

    def store(self, participant_id: str, spec_digest: str, payload: bytes,
              completed: bool, salvaged_rows: int) -> tuple[StoredResult, bool]:
        """Persist durably; returns (record, created). Idempotent by content."""
        content_digest = hashlib.sha256(payload).hexdigest()
        key = (participant_id, spec_digest, content_digest)
        with self._lock:
            existing = self._index.get(key)
            if existing is not None:
                return existing, False
            path = self._result_path(content_digest)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "wb") as f:
                f.write(payload)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, path)
            _fsync_dir(self.results_dir)
            record = StoredResult(participant_id, spec_digest, content_digest,
                                  completed, salvaged_rows, int(time.time() * 1000))
            line = json.dumps({
                "participant_id": record.participant_id,
                "spec_digest": record.spec_digest,
                "content_digest": record.content_digest,
                "completed": record.completed,
                "salvaged_rows": record.salvaged_rows,
                "received_ms": record.received_ms,
            }, sort_keys=True)
            with open(self.journal_path, "a", encoding="utf-8") as jf:
                jf.write(line + "\n")
                jf.flush()
                os.fsync(jf.fileno())
            self._index[key] = record
            self._order.append(record)
            return record, True

    def receipts_for(self, participant_id: str) -> list[StoredResult]:
        with self._lock:
            return [r for r in self._order if r.participant_id == participant_id]

    def progress_index(self, participant_id: str) -> int:
        """Completed uploads recorded for a participant (= next plan index)."""
        with self._lock:
            return sum(1 for r in self._order
                       if r.participant_id == participant_id and r.completed)

    def all_records(self) -> list[StoredResult]:
        with self._lock:
            return list(self._order)

    def payload(self, record: StoredResult) -> bytes:
        path = self._result_path(record.content_digest)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageError(f"stored result unreadable: {exc}") from exc


# ---------------------------------------------------------------------------
# Experiment plans
# ---------------------------------------------------------------------------

@dataclass
class PlanEntry:
    spec: qspec.QuestionnaireSpec
    digest: str
    document: dict


@dataclass
class ExperimentPlan:
    participants: dict[str, list[PlanEntry]] = field(default_factory=dict)

    def entries_for(self, participant_id: str) -> list[PlanEntry] | None:
        return self.participants.get(participant_id)


def load_plan(path: Path) -> ExperimentPlan:
    path = Path(path)
    doc = json.loads(path.read_text("utf-8"))
    base = path.resolve().parent
    cache: dict[str, PlanEntry] = {}
    plan = ExperimentPlan()
    for pid, spec_files in doc.get("participants", {}).items():
        entries = []
        for rel in spec_files:
            if rel not in cache:
                data = (base / rel).read_bytes()
                result = qspec.parse_spec(data)
                if result.spec is None:
                    problems = "; ".join(d.message for d in result.diagnostics)
                    raise ValueError(f"plan spec {rel!r} does not validate: {problems}")
                cache[rel] = PlanEntry(result.spec, qspec.spec_digest(result.spec),
                                       qspec.spec_to_doc(result.spec))
            entries.append(cache[rel])
        plan.participants[pid] = entries
    return plan


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def create_app(config: ServerConfig, plan: ExperimentPlan | None = None,
               store: ResultStore | None = None,
               coordinator: sync.Coordinator | None = None) -> FastAPI:
    store = store or ResultStore(config.data_dir)
    if plan is None:
        plan = load_plan(config.plan_file) if config.plan_file else ExperimentPlan()
    coordinator = coordinator or sync.Coordinator()
    app = FastAPI(title="screenflow collection service")
    app.state.store = store
    app.state.plan = plan
    app.state.coordinator = coordinator
    connections: dict[tuple[str, str], WebSocket] = {}

    @app.get("/questionnaire")
    def questionnaire(participant: str = Query(...)):
        entries = plan.entries_for(participant)
        if entries is None:
            return JSONResponse({"detail": "unknown participant"}, status_code=404)
        index = store.progress_index(participant)
        if index >= len(entries):
            return JSONResponse(
                {"status": "complete", "participant": participant,
                 "completed": len(entries)},
                status_code=409)
        entry = entries[index]
        preload = [
            {"asset_id": a.asset_id, "media_type": a.media_type, "uri": a.uri}
            for a in entry.spec.assets if a.preload
        ]
        return {
            "participant": participant,
            "index": index,
            "total": len(entries),
            "spec_digest": entry.digest,
            "spec": entry.document,
            "preload": preload,
        }

    @app.post("/results")
    async def upload(request: Request, participant: str = Query(...),
                     spec: str = Query("")):
        payload = await request.body()
        if len(payload) > config.max_payload_bytes:
            return JSONResponse({"detail": "payload too large"}, status_code=413)
        try:
            doc = export.from_csv(payload)
        except export.ExportError as exc:
            return JSONResponse({"code": exc.code, "detail": str(exc)},
                                status_code=400)
        completed = any(r[4] == "meta" and r[5] == "status" and r[6] == "completed"
                        for r in doc.rows)
        record, _created = store.store(participant, spec, payload,
                                       completed, len(doc.problems))
        return record.receipt()

    @app.get("/results")
    def receipts(participant: str = Query(...)):
        return {
            "participant": participant,
            "receipts": [r.receipt() for r in store.receipts_for(participant)],
            "progress_index": store.progress_index(participant),
        }

    @app.get("/export.csv")
    def export_csv(spec_id: str = Query(""), spec_version: str = Query("")):
        docs = []
        for record in store.all_records():
            try:
                parsed = export.from_csv(store.payload(record))
            except export.ExportError:
                continue  # quarantined damage never blocks researcher export
            if spec_id:
                parsed.rows = [r for r in parsed.rows if r[2] == spec_id]
            if spec_version:
                parsed.rows = [r for r in parsed.rows if r[3] == spec_version]
            if parsed.rows:
                docs.append(parsed)
        try:
            table = export.aggregate(docs)
        except export.ExportError as exc:
            return JSONResponse({"code": exc.code, "detail": str(exc)},
                                status_code=409)
        return Response(table.to_csv(), media_type="text/csv; charset=utf-8")

    @app.get("/scales/{variant}.svg")
    def scale_svg(variant: str, min_label: str = Query(""),
                  max_label: str = Query(""), dimension: str = Query("")):
        try:
            svg = scales.render_builtin(variant, min_label=min_label,
                                        max_label=max_label, dimension=dimension)
        except KeyError:
            return JSONResponse({"detail": "unknown scale"}, status_code=404)
        return Response(svg, media_type="image/svg+xml")

    @app.websocket("/sync/{group}")
    async def sync_socket(ws: WebSocket, group: str):
        await ws.accept()
        registered: set[tuple[str, str]] = set()
        try:
            while True:
                frame = await ws.receive_text()
                try:
                    message = sync.decode_message(frame)
                except sync.SyncProtocolError:
                    continue  # unparseable frame: drop, sender retransmits
                if message.session_group != group:
                    continue
                key = (group, message.device_id)
                connections[key] = ws
                registered.add(key)
                try:
                    outbound = coordinator.handle(message)
                except sync.SyncProtocolError:
                    continue  # e.g. data before hello after reorder
                for out in outbound:
                    target = connections.get((group, out.to_device))
                    if target is None:
                        continue
                    try:
                        await target.send_text(
                            sync.encode_message(out.message).decode("utf-8"))
                    except Exception:
                        connections.pop((group, out.to_device), None)
        except WebSocketDisconnect:
            pass
        finally:
            for key in registered:
                if connections.get(key) is ws:
                    connections.pop(key, None)

    if config.assets_dir and Path(config.assets_dir).is_dir():
        app.mount("/assets", StaticFiles(directory=config.assets_dir), name="assets")
    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/app", StaticFiles(directory=config.ui_dir, html=True), name="app")
    return app


def run(config: ServerConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
