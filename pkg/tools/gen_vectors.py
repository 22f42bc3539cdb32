#!/usr/bin/env python3
"""Generate the cross-language conformance vectors.

The vectors pin the session engine's observable behavior (screen routing,
gating, answer handling, event log) and the exact CSV bytes a completed
session exports. Any engine port must replay every case and match the
expectations bit for bit. Regenerate with:

    python3 tools/gen_vectors.py

The test suites on both sides fail if this file drifts from the engine.
"""

from __future__ import annotations

import base64
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from screenflow import engine, export, qspec  # noqa: E402
from screenflow.capture import BehavioralEvent  # noqa: E402
from screenflow.sync import SyncMessage, encode_message  # noqa: E402

from tests.helpers import random_spec_doc, random_answer_doc  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "conformance"

HANDCRAFTED = {
    "spec_id": "vector-demo",
    "version": "3",
    "title": "Vector demo ü \"quoted\", comma",
    "screens": [
        {"screen_id": "s0", "kind": "items", "items": [
            {"item_id": "cat", "question": "Pick one, please \"now\"",
             "required": True,
             "scale": {"variant": "category_rating",
                       "labels": ["néin", "ja,wohl", "line\nbreak"]}},
            {"item_id": "vas", "question": "Slide it",
             "required": False,
             "scale": {"variant": "visual_analogue",
                       "min_label": "kalt", "max_label": "heiß"}},
        ]},
        {"screen_id": "s1", "kind": "wait", "duration_ms": 250},
        {"screen_id": "s2", "kind": "media", "asset_id": "clip",
         "autoplay": True, "preload": True},
        {"screen_id": "s3", "kind": "items", "items": [
            {"item_id": "text", "question": "Say why",
             "required": True,
             "scale": {"variant": "free_text", "max_length": 200}},
            {"item_id": "tlx", "question": "Workload?",
             "required": True, "scale": {"variant": "nasa_tlx",
                                         "dimension": "Mental Demand"}},
            {"item_id": "cq", "question": "Quality?",
             "required": False, "scale": {"variant": "continuous_quality"}},
            {"item_id": "ink", "question": "Sign here",
             "required": False,
             "scale": {"variant": "free_hand", "width_px": 100, "height_px": 50}},
        ]},
        {"screen_id": "s4", "kind": "export",
         "target": "upload-then-download-fallback"},
    ],
    "routing": [
        {"after_screen": "s0",
         "condition": {"item_id": "cat", "comparator": "eq", "literal": 0},
         "goto_screen": "s4", "priority": 5},
        {"after_screen": "s0",
         "condition": {"item_id": "vas", "comparator": "gt", "literal": 0.75},
         "goto_screen": "s3", "priority": 9},
    ],
    "assets": [{"asset_id": "clip", "media_type": "video/mp4",
                "uri": "media/clip.mp4", "preload": True}],
}


def run_case(name: str, doc: dict, rng: random.Random, case_seed: int) -> dict:
    result = qspec.parse_spec(json.dumps(doc))
    assert result.spec is not None, [d.format() for d in result.diagnostics]
    spec = result.spec
    session = engine.create_session(spec, f"participant-{name}", case_seed,
                                    clock=lambda: 0,
                                    wallclock_ms=1_750_000_000_000 + case_seed)
    session.session_id = f"session-{name}"
    steps: list[dict] = []
    t = 0
    doc_screens = {s["screen_id"]: s for s in doc["screens"]}
    guard = 0
    while session.status == "in_progress" and guard < 60:
        guard += 1
        screen = session.active_screen()
        sdoc = doc_screens[screen.screen_id]
        if isinstance(screen, qspec.ItemsScreen):
            required = [i for i in screen.items if i.required]
            if required:
                steps.append({"op": "ready", "at": t, "expect": False})
                steps.append({"op": "advance_expect_not_ready", "at": t})
            for item in screen.items:
                if not item.required and rng.random() < 0.35:
                    continue
                for _ in range(rng.randrange(1, 3)):
                    sc = next(i for i in sdoc["items"]
                              if i["item_id"] == item.item_id)["scale"]
                    value = random_answer_doc(rng, sc)
                    t += rng.randrange(3, 300)
                    session.submit_answer(item.item_id,
                                          engine.answer_from_json(value), t)
                    steps.append({"op": "submit", "item_id": item.item_id,
                                  "value": value, "at": t})
        elif isinstance(screen, qspec.WaitScreen):
            if screen.duration_ms > 0:
                steps.append({"op": "ready", "at": t, "expect": False})
            t += screen.duration_ms
        elif isinstance(screen, qspec.MediaScreen) and screen.autoplay:
            steps.append({"op": "ready", "at": t, "expect": False})
            t += rng.randrange(10, 800)
            event = {"kind": "media-ended", "payload": {"asset_id": screen.asset_id},
                     "at": t}
            session.record_event(BehavioralEvent("media-ended", t,
                                                 dict(event["payload"])))
            steps.append({"op": "event", **event})
        if rng.random() < 0.3:
            kind = rng.choice(["focus-lost", "focus-gained"])
            # deliberately sometimes non-monotonic
            at = max(0, t - rng.choice([0, 0, 0, 50]))
            session.record_event(BehavioralEvent(kind, at))
            steps.append({"op": "event", "kind": kind, "payload": {}, "at": at})
        t += rng.randrange(3, 200)
        steps.append({"op": "ready", "at": t, "expect": True})
        session.advance(t)
        steps.append({
            "op": "advance", "at": t,
            "expect_status": session.status,
            "expect_screen": (session.active_screen().screen_id
                              if session.status == "in_progress" else None),
        })
    assert session.status == "completed", name
    answers = {k: engine.answer_to_json(v) for k, v in session.answers.items()}
    return {
        "name": name,
        "spec": qspec.spec_to_doc(spec),
        "participant_id": session.participant_id,
        "session_id": session.session_id,
        "seed": case_seed,
        "started_wallclock_ms": session.started_wallclock_ms,
        "steps": steps,
        "final": {
            "status": session.status,
            "shown_sequence": [e.payload["screen_id"] for e in session.events
                               if e.kind == "screen-shown"],
            "answers": answers,
            "revisions": dict(session.revisions),
            "events": [e.to_json() for e in session.events],
            "csv_base64": base64.b64encode(export.to_csv(session)).decode("ascii"),
        },
    }


def forced_routing_case() -> dict:
    """Route through the handcrafted spec's early-exit rule (cat == 0)."""
    rng = random.Random(1)
    doc = json.loads(json.dumps(HANDCRAFTED))
    result = qspec.parse_spec(json.dumps(doc))
    spec = result.spec
    session = engine.create_session(spec, "participant-early-exit", 7,
                                    clock=lambda: 0,
                                    wallclock_ms=1_750_000_000_007)
    session.session_id = "session-early-exit"
    steps = [
        {"op": "submit", "item_id": "cat",
         "value": {"type": "category", "index": 0}, "at": 120},
        {"op": "ready", "at": 130, "expect": True},
        {"op": "advance", "at": 140, "expect_status": "in_progress",
         "expect_screen": "s4"},
        {"op": "ready", "at": 150, "expect": True},
        {"op": "advance", "at": 160, "expect_status": "completed",
         "expect_screen": None},
    ]
    session.submit_answer("cat", engine.Category(0), 120)
    session.advance(140)
    session.advance(160)
    return {
        "name": "early-exit",
        "spec": qspec.spec_to_doc(spec),
        "participant_id": session.participant_id,
        "session_id": session.session_id,
        "seed": 7,
        "started_wallclock_ms": session.started_wallclock_ms,
        "steps": steps,
        "final": {
            "status": "completed",
            "shown_sequence": ["s0", "s4"],
            "answers": {k: engine.answer_to_json(v)
                        for k, v in session.answers.items()},
            "revisions": dict(session.revisions),
            "events": [e.to_json() for e in session.events],
            "csv_base64": base64.b64encode(export.to_csv(session)).decode("ascii"),
        },
    }


def gen_engine_vectors() -> dict:
    rng = random.Random(0x5EED)
    cases = [forced_routing_case()]
    cases.append(run_case("demo-0", json.loads(json.dumps(HANDCRAFTED)),
                          rng, 1001))
    cases.append(run_case("demo-1", json.loads(json.dumps(HANDCRAFTED)),
                          rng, 1002))
    for i in range(30):
        doc = random_spec_doc(rng, min_screens=2, max_screens=6)
        cases.append(run_case(f"random-{i:02d}", doc, rng, 2000 + i))
    return {"format": "screenflow-conformance", "version": 1, "cases": cases}


def gen_sync_frames() -> dict:
    samples = [
        SyncMessage("g1", "tablet", 1, "hello", {}),
        SyncMessage("g1", "tablet", 2, "progress",
                    {"screen_id": "s3", "status": "shown"}),
        SyncMessage("g1", "phone", 9, "barrier-reached", {"barrier_id": "b,1ü"}),
        SyncMessage("g1", "", 4, "ack", {"device_id": "tablet", "seq": 2}),
        SyncMessage("g1", "", 5, "barrier-release", {"barrier_id": "b,1ü"}),
        SyncMessage("g1", "tablet", 3, "command",
                    {"command": "degrade level=3 \"hard\"", "to": "*"}),
        SyncMessage("g1", "tablet", 0, "resume-request", {}),
        SyncMessage("g1", "", 6, "state-snapshot", {
            "view": {"tablet": {"screen_id": "s3", "status": "shown", "seq": 2}},
            "barriers_open": {}, "barriers_released": ["b,1ü"],
            "last_seen": {"tablet": 3, "phone": 9}}),
    ]
    return {
        "format": "screenflow-sync-frames",
        "version": 1,
        "frames": [
            {"message": {"session_group": m.session_group,
                         "device_id": m.device_id, "seq": m.seq,
                         "kind": m.kind, "payload": m.payload},
             "frame_base64": base64.b64encode(encode_message(m)).decode("ascii")}
            for m in samples
        ],
    }


def main(argv: list[str] | None = None) -> None:
    out_dir = OUT_DIR
    args = list(sys.argv[1:] if argv is None else argv)
    if args[:1] == ["--out"]:
        out_dir = Path(args[1])
    out_dir.mkdir(parents=True, exist_ok=True)
    vectors = gen_engine_vectors()
    (out_dir / "vectors.json").write_text(
        json.dumps(vectors, indent=1, ensure_ascii=False, sort_keys=True) + "\n",
        "utf-8")
    frames = gen_sync_frames()
    (out_dir / "sync_frames.json").write_text(
        json.dumps(frames, indent=1, ensure_ascii=False, sort_keys=True) + "\n",
        "utf-8")
    n = len(vectors["cases"])
    print(f"wrote {n} engine cases and {len(frames['frames'])} sync frames "
          f"to {out_dir}")


if __name__ == "__main__":
    main()
