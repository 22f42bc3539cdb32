import json

import pytest

from screenflow import qspec

DEMO_DOC = {
    "spec_id": "demo-study",
    "version": "1.2",
    "title": "Perceived quality demo",
    "screens": [
        {"screen_id": "intro", "kind": "items", "items": [
            {"item_id": "consent", "question": "Do you agree to take part?",
             "required": True,
             "scale": {"variant": "category_rating", "labels": ["no", "yes"]}},
        ]},
        {"screen_id": "clip", "kind": "media", "asset_id": "clip1",
         "autoplay": True, "preload": True},
        {"screen_id": "rate", "kind": "items", "items": [
            {"item_id": "overall", "question": "Overall quality of the clip?",
             "required": True,
             "scale": {"variant": "continuous_quality"}},
            {"item_id": "effort", "question": "How demanding was the task?",
             "required": False,
             "scale": {"variant": "nasa_tlx", "dimension": "Mental Demand"}},
            {"item_id": "vas", "question": "How annoying was the stalling?",
             "required": False,
             "scale": {"variant": "visual_analogue",
                       "min_label": "not at all", "max_label": "extremely"}},
            {"item_id": "comment", "question": "Anything to add?",
             "required": False,
             "scale": {"variant": "free_text", "max_length": 400}},
            {"item_id": "sketch", "question": "Sketch the artifact you saw.",
             "required": False,
             "scale": {"variant": "free_hand", "width_px": 320, "height_px": 200}},
        ]},
        {"screen_id": "pause", "kind": "wait", "duration_ms": 1500},
        {"screen_id": "done", "kind": "export",
         "target": "upload-then-download-fallback"},
    ],
    "routing": [
        {"after_screen": "intro",
         "condition": {"item_id": "consent", "comparator": "eq", "literal": 0},
         "goto_screen": "done", "priority": 10},
    ],
    "assets": [
        {"asset_id": "clip1", "media_type": "video/mp4",
         "uri": "media/clip1.mp4", "preload": True},
    ],
}


@pytest.fixture
def demo_doc() -> dict:
    return json.loads(json.dumps(DEMO_DOC))


@pytest.fixture
def demo_spec(demo_doc) -> qspec.QuestionnaireSpec:
    result = qspec.parse_spec(json.dumps(demo_doc))
    assert result.spec is not None, [d.format() for d in result.diagnostics]
    return result.spec
