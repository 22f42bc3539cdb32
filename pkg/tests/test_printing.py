import json

from screenflow import diagnostics as dg
from screenflow import printing, scales
from screenflow.printing import page_count, print_layout

from .helpers import parse_doc


def test_one_page_per_items_screen():
    doc = {
        "spec_id": "p", "version": "1", "title": "Pages",
        "screens": [
            {"screen_id": f"s{i}", "kind": "items", "items": [
                {"item_id": f"q{i}", "question": "?",
                 "scale": {"variant": "category_rating", "labels": ["a", "b"]}}]}
            for i in range(3)
        ],
    }
    result = print_layout(parse_doc(doc))
    assert result.document.count('class="sheet"') == 3


def test_wait_screen_renders_placeholder_without_inputs(demo_spec):
    result = print_layout(demo_spec)
    assert "Pause here for 1.5 seconds" in result.document
    assert "<input" not in result.document
    # export screen contributes no page
    assert result.document.count('class="sheet"') == page_count(demo_spec) == 4


def test_vas_page_embeds_identical_svg(demo_spec):
    result = print_layout(demo_spec)
    expected = scales.visual_analogue_svg("not at all", "extremely")
    assert expected in result.document


def test_questions_are_escaped():
    doc = {
        "spec_id": "p", "version": "1", "title": "T<script>",
        "screens": [{"screen_id": "s", "kind": "items", "items": [
            {"item_id": "q", "question": "a <b> & c",
             "scale": {"variant": "free_text", "max_length": 10}}]}],
    }
    document = print_layout(parse_doc(doc)).document
    assert "a &lt;b&gt; &amp; c" in document
    assert "<script>" not in document


def test_oversized_freehand_warns():
    doc = {
        "spec_id": "p", "version": "1", "title": "big",
        "screens": [{"screen_id": "s", "kind": "items", "items": [
            {"item_id": "q", "question": "draw",
             "scale": {"variant": "free_hand", "width_px": 2000,
                       "height_px": 100}}]}],
    }
    result = print_layout(parse_doc(doc))
    assert [d.code for d in result.diagnostics] == [dg.UNPRINTABLE_SCALE]


def test_custom_svg_uses_asset_loader(demo_doc):
    demo_doc["assets"].append({"asset_id": "art", "media_type": "image/svg+xml",
                               "uri": "art.svg", "preload": False})
    demo_doc["screens"][2]["items"][0]["scale"] = {
        "variant": "custom_svg", "svg_asset_id": "art",
        "value_min": 0, "value_max": 1}
    spec = parse_doc(demo_doc)
    art = '<svg data-anchor-min-x="1" data-anchor-max-x="9" data-anchor-y="5"></svg>'
    with_asset = print_layout(spec, lambda uri: art.encode() if uri == "art.svg"
                              else None)
    assert art in with_asset.document
    assert with_asset.diagnostics == []
    without = print_layout(spec, None)
    assert [d.code for d in without.diagnostics] == [dg.ASSET_NOT_AVAILABLE]


def test_document_is_self_contained(demo_spec):
    document = print_layout(demo_spec).document
    assert document.startswith("<!doctype html>")
    assert "http://" not in document.replace("http://www.w3.org", "")
    assert "src=" not in document
