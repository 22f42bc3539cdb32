"""Shared builders: random questionnaire documents and session drivers."""

from __future__ import annotations

import json
import random

from screenflow import engine, qspec
from screenflow.capture import BehavioralEvent

# Strings that historically break CSV/JSON round trips.
NASTY_STRINGS = [
    "plain",
    "comma, separated",
    'quo"ted',
    "new\nline",
    "carriage\rreturn",
    "tab\tseparated",
    "  leading and trailing  ",
    "ümlaut über",
    "日本語テキスト",
    "mixed: \"q\", \n\r comma, ü",
    "''",
    '""',
    "=formula()",
]


def nasty_text(rng: random.Random, max_len: int = 30) -> str:
    if rng.random() < 0.5:
        return rng.choice(NASTY_STRINGS)
    alphabet = "abc ,\"\n\r\tüß日本0123'"
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(1, max_len)))


def word(rng: random.Random, prefix: str, i: int) -> str:
    return f"{prefix}{i}"


def random_scale_doc(rng: random.Random, asset_ids: list[str]) -> dict:
    choices = ["category_rating", "visual_analogue", "nasa_tlx",
               "continuous_quality", "free_text", "free_hand"]
    if asset_ids and rng.random() < 0.15:
        return {"variant": "custom_svg", "svg_asset_id": rng.choice(asset_ids),
                "value_min": 0, "value_max": 100}
    variant = rng.choice(choices)
    if variant == "category_rating":
        n = rng.randrange(2, 6)
        return {"variant": variant,
                "labels": [f"label {i} {nasty_text(rng, 8)}" for i in range(n)]}
    if variant == "visual_analogue":
        return {"variant": variant, "min_label": nasty_text(rng, 10),
                "max_label": nasty_text(rng, 10)}
    if variant == "nasa_tlx":
        return {"variant": variant,
                "dimension": rng.choice(["Mental Demand", "Physical Demand",
                                         "Temporal Demand", "Performance",
                                         "Effort", "Frustration"])}
    if variant == "free_text":
        return {"variant": variant, "max_length": rng.randrange(50, 500)}
    if variant == "free_hand":
        return {"variant": variant, "width_px": rng.randrange(50, 300),
                "height_px": rng.randrange(50, 200)}
    return {"variant": variant}


def random_spec_doc(rng: random.Random, min_screens: int = 2,
                    max_screens: int = 7, with_export: bool = True) -> dict:
    """A structurally valid questionnaire document with forward-only routing."""
    n_screens = rng.randrange(min_screens, max_screens + 1)
    assets = []
    if rng.random() < 0.5:
        for i in range(rng.randrange(1, 3)):
            assets.append({"asset_id": f"asset{i}",
                           "media_type": rng.choice(["video/mp4", "audio/ogg",
                                                     "image/svg+xml"]),
                           "uri": f"media/asset{i}.bin",
                           "preload": rng.random() < 0.7})
    asset_ids = [a["asset_id"] for a in assets]

    screens = []
    item_counter = 0
    items_by_screen: dict[str, list[dict]] = {}
    for si in range(n_screens):
        sid = f"s{si}"
        roll = rng.random()
        if 0.74 <= roll < 0.88 and not asset_ids:
            roll = 0.95  # no assets declared: media screens are off the table
        if roll < 0.62:
            items = []
            for _ in range(rng.randrange(1, 4)):
                items.append({
                    "item_id": f"q{item_counter}",
                    "question": f"Q{item_counter}: {nasty_text(rng, 16)}",
                    "required": rng.random() < 0.6,
                    "scale": random_scale_doc(rng, asset_ids),
                })
                item_counter += 1
            screens.append({"screen_id": sid, "kind": "items", "items": items})
            items_by_screen[sid] = items
        elif roll < 0.74:
            screens.append({"screen_id": sid, "kind": "wait",
                            "duration_ms": rng.choice([0, 100, 1000, 5000])})
        elif roll < 0.88:
            screens.append({"screen_id": sid, "kind": "media",
                            "asset_id": rng.choice(asset_ids),
                            "autoplay": rng.random() < 0.8,
                            "preload": rng.random() < 0.8})
        else:
            screens.append({"screen_id": sid, "kind": "remote_command",
                            "command": nasty_text(rng, 12)})
    if with_export:
        screens.append({"screen_id": f"s{n_screens}", "kind": "export",
                        "target": rng.choice(["upload", "download",
                                              "upload-then-download-fallback"])})

    routing = []
    # Forward-only targets keep random runs loop-free.
    for si, screen in enumerate(screens[:-1]):
        if rng.random() > 0.4:
            continue
        eligible_items = [item for prior in screens[:si + 1]
                          if prior["kind"] == "items"
                          for item in prior["items"]]
        if not eligible_items:
            continue
        used_priorities: set[int] = set()
        for _ in range(rng.randrange(1, 3)):
            item = rng.choice(eligible_items)
            target = rng.choice(screens[si + 1:])
            priority = rng.randrange(0, 100)
            if priority in used_priorities:
                continue
            used_priorities.add(priority)
            routing.append({
                "after_screen": screen["screen_id"],
                "condition": _condition_doc(rng, item),
                "goto_screen": target["screen_id"],
                "priority": priority,
            })
    return {
        "spec_id": f"spec-{rng.randrange(10**6)}",
        "version": "1.0",
        "title": f"Study {nasty_text(rng, 12)}",
        "screens": screens,
        "routing": routing,
        "assets": assets,
    }


def _condition_doc(rng: random.Random, item: dict) -> dict:
    comparator = rng.choice(["eq", "ne", "lt", "le", "gt", "ge",
                             "answered", "unanswered"])
    cond = {"item_id": item["item_id"], "comparator": comparator, "literal": None}
    if comparator in ("answered", "unanswered"):
        return cond
    variant = item["scale"]["variant"]
    if variant == "category_rating":
        cond["literal"] = rng.randrange(0, len(item["scale"]["labels"]))
    elif variant == "free_text":
        cond["literal"] = rng.choice(["a", "m", "z", "text", ""])
    elif variant == "free_hand":
        cond["literal"] = "data:"  # images never compare; exercises that path
    else:
        cond["literal"] = round(rng.random(), 2)
    return cond


def random_answer_doc(rng: random.Random, scale_doc: dict) -> dict:
    variant = scale_doc["variant"]
    if variant == "category_rating":
        return {"type": "category",
                "index": rng.randrange(0, len(scale_doc["labels"]))}
    if variant == "free_text":
        limit = scale_doc.get("max_length", 1000)
        return {"type": "text", "text": nasty_text(rng)[:limit]}
    if variant == "free_hand":
        return {"type": "image",
                "data_uri": "data:image/png;base64,aW1n" + "QUJD" * rng.randrange(1, 4)}
    return {"type": "continuous", "value": round(rng.random(), 4)}


def parse_doc(doc: dict) -> qspec.QuestionnaireSpec:
    result = qspec.parse_spec(json.dumps(doc))
    assert result.spec is not None, [d.format() for d in result.diagnostics]
    return result.spec


def drive_session(spec: qspec.QuestionnaireSpec, doc: dict, rng: random.Random,
                  participant: str = "p1", with_noise: bool = False):
    """Run a full random session; returns (session, trace).

    The trace records, per screen visit, the screen id and the answer
    submissions made there (in order), which is exactly what the
    independent route interpreter needs to replay the run.
    """
    session = engine.create_session(spec, participant, rng.getrandbits(64),
                                    clock=lambda: 0, wallclock_ms=1_700_000_000_000)
    t = 0
    trace = []
    doc_screens = {s["screen_id"]: s for s in doc["screens"]}
    steps = 0
    while session.status == "in_progress" and steps < 100:
        steps += 1
        screen = session.active_screen()
        visit = {"screen_id": screen.screen_id, "answers": []}
        t += rng.randrange(1, 500)
        if isinstance(screen, qspec.ItemsScreen):
            doc_items = {i["item_id"]: i for i in doc_screens[screen.screen_id]["items"]}
            for item in screen.items:
                if not item.required and rng.random() < 0.3:
                    continue
                submissions = rng.randrange(1, 3)
                for _ in range(submissions):
                    value_doc = random_answer_doc(rng, doc_items[item.item_id]["scale"])
                    t += rng.randrange(1, 200)
                    session.submit_answer(item.item_id,
                                          engine.answer_from_json(value_doc), t)
                    visit["answers"].append({"item_id": item.item_id,
                                             "value": value_doc})
        elif isinstance(screen, qspec.WaitScreen):
            t += screen.duration_ms
        elif isinstance(screen, qspec.MediaScreen) and screen.autoplay:
            t += rng.randrange(1, 2000)
            session.record_event(BehavioralEvent(
                "media-ended", t, {"asset_id": screen.asset_id}))
        if with_noise and rng.random() < 0.3:
            session.record_event(BehavioralEvent(
                rng.choice(["focus-lost", "focus-gained"]), t))
        t += rng.randrange(1, 300)
        trace.append(visit)
        session.advance(t)
    assert session.status == "completed", "random run hit the step cap"
    return session, trace
