"""Scale artwork invariants, including cross-component byte identity."""

from pathlib import Path

import pytest

from screenflow import scales

ROOT = Path(__file__).resolve().parents[1]
VENDORED = ROOT / "frontend" / "public" / "scales"


@pytest.mark.parametrize("variant", scales.BUILTIN_VARIANTS)
def test_render_is_deterministic(variant):
    assert scales.render_builtin(variant) == scales.render_builtin(variant)


def test_anchor_metadata_present_on_every_builtin():
    for variant in scales.BUILTIN_VARIANTS:
        svg = scales.render_builtin(variant)
        for attr in ("data-anchor-min-x", "data-anchor-max-x", "data-anchor-y"):
            assert attr in svg, f"{variant} lacks {attr}"


def test_labels_are_escaped():
    svg = scales.visual_analogue_svg('<b>&"', "x")
    assert "<b>" not in svg
    assert "&lt;b&gt;&amp;" in svg


def test_position_mapping_endpoints_and_midpoint():
    svg = scales.visual_analogue_svg("a", "b")
    lo, hi = scales.ANCHOR_MIN_X, scales.ANCHOR_MAX_X
    assert "data-anchor-min-x=\"40\"" in svg
    assert scales.position_to_value(lo, lo, hi) == 0.0
    assert scales.position_to_value(hi, lo, hi) == 1.0
    assert abs(scales.position_to_value((lo + hi) / 2, lo, hi) - 0.5) <= 0.01
    assert scales.position_to_value(lo - 50, lo, hi) == 0.0
    assert scales.position_to_value(hi + 50, lo, hi) == 1.0


@pytest.mark.parametrize("variant", scales.BUILTIN_VARIANTS)
def test_vendored_frontend_copies_match_generator(variant):
    """The browser client ships the byte-identical drawings."""
    vendored = (VENDORED / f"{variant}.svg").read_text("utf-8")
    assert vendored == scales.render_builtin(variant)
