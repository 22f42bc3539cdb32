"""Canonical SVG artwork for the graphical scales.

Graphical scales must look exactly the same wherever they appear: the
browser UI, the printable layout, and the researcher's archive all consume
the byte-identical SVG produced here. Every drawing carries calibration
metadata on its root element:

    data-anchor-min-x / data-anchor-max-x / data-anchor-y

in viewBox coordinates. The answer value is the linear position between
the two anchors: clicking min-x means 0.0, max-x means 1.0. Custom SVG
assets supplied by researchers follow the same attribute convention.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

VAS_WIDTH = 500
VAS_HEIGHT = 90
ANCHOR_MIN_X = 40
ANCHOR_MAX_X = 460
ANCHOR_Y = 45

TLX_TICKS = 21  # the subscale prints 20 intervals

CONTINUOUS_QUALITY_LABELS = ("extremely bad", "bad", "poor", "fair", "good",
                             "excellent", "ideal")


def _svg_open(height: int, kind: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {VAS_WIDTH} {height}" width="{VAS_WIDTH}" height="{height}" '
        f'data-scale-kind="{kind}" data-anchor-min-x="{ANCHOR_MIN_X}" '
        f'data-anchor-max-x="{ANCHOR_MAX_X}" data-anchor-y="{ANCHOR_Y}">'
    )


def _track() -> str:
    return (
        f'<line x1="{ANCHOR_MIN_X}" y1="{ANCHOR_Y}" x2="{ANCHOR_MAX_X}" '
        f'y2="{ANCHOR_Y}" stroke="#000" stroke-width="2"/>'
        f'<line x1="{ANCHOR_MIN_X}" y1="{ANCHOR_Y - 12}" x2="{ANCHOR_MIN_X}" '
        f'y2="{ANCHOR_Y + 12}" stroke="#000" stroke-width="2"/>'
        f'<line x1="{ANCHOR_MAX_X}" y1="{ANCHOR_Y - 12}" x2="{ANCHOR_MAX_X}" '
        f'y2="{ANCHOR_Y + 12}" stroke="#000" stroke-width="2"/>'
    )


def visual_analogue_svg(min_label: str = "", max_label: str = "") -> str:
    """Horizontal line between two labeled end anchors."""
    parts = [_svg_open(VAS_HEIGHT, "visual_analogue"), _track()]
    if min_label:
        parts.append(f'<text x="{ANCHOR_MIN_X}" y="{ANCHOR_Y + 30}" '
                     f'font-family="sans-serif" font-size="12" '
                     f'text-anchor="middle">{escape(min_label)}</text>')
    if max_label:
        parts.append(f'<text x="{ANCHOR_MAX_X}" y="{ANCHOR_Y + 30}" '
                     f'font-family="sans-serif" font-size="12" '
                     f'text-anchor="middle">{escape(max_label)}</text>')
    parts.append("</svg>")
    return "".join(parts)


def nasa_tlx_svg(dimension: str = "") -> str:
    """Workload rating subscale: 20 gradations between Low and High."""
    parts = [_svg_open(120, "nasa_tlx")]
    if dimension:
        parts.append(f'<text x="{VAS_WIDTH // 2}" y="20" font-family="sans-serif" '
                     f'font-size="14" font-weight="bold" '
                     f'text-anchor="middle">{escape(dimension)}</text>')
    parts.append(_track())
    span = ANCHOR_MAX_X - ANCHOR_MIN_X
    for i in range(TLX_TICKS):
        x = ANCHOR_MIN_X + round(i * span / (TLX_TICKS - 1))
        h = 10 if i % 2 == 0 else 6
        parts.append(f'<line x1="{x}" y1="{ANCHOR_Y - h}" x2="{x}" '
                     f'y2="{ANCHOR_Y}" stroke="#000" stroke-width="1"/>')
    parts.append(f'<text x="{ANCHOR_MIN_X}" y="{ANCHOR_Y + 30}" '
                 f'font-family="sans-serif" font-size="12" '
                 f'text-anchor="middle">Low</text>')
    parts.append(f'<text x="{ANCHOR_MAX_X}" y="{ANCHOR_Y + 30}" '
                 f'font-family="sans-serif" font-size="12" '
                 f'text-anchor="middle">High</text>')
    parts.append("</svg>")
    return "".join(parts)


def continuous_quality_svg() -> str:
    """Continuous perceived-quality scale with seven reference labels."""
    parts = [_svg_open(130, "continuous_quality"), _track()]
    span = ANCHOR_MAX_X - ANCHOR_MIN_X
    n = len(CONTINUOUS_QUALITY_LABELS)
    for i, label in enumerate(CONTINUOUS_QUALITY_LABELS):
        x = ANCHOR_MIN_X + round(i * span / (n - 1))
        parts.append(f'<line x1="{x}" y1="{ANCHOR_Y - 8}" x2="{x}" '
                     f'y2="{ANCHOR_Y + 8}" stroke="#000" stroke-width="1"/>')
        parts.append(f'<text x="{x}" y="{ANCHOR_Y + 28}" font-family="sans-serif" '
                     f'font-size="9" text-anchor="middle" '
                     f'transform={quoteattr(f"rotate(25 {x} {ANCHOR_Y + 28})")}>'
                     f'{escape(label)}</text>')
    parts.append("</svg>")
    return "".join(parts)


BUILTIN_VARIANTS = ("visual_analogue", "nasa_tlx", "continuous_quality")


def render_builtin(variant: str, min_label: str = "", max_label: str = "",
                   dimension: str = "") -> str:
    """Render a built-in scale by variant name; raises KeyError on others."""
    if variant == "visual_analogue":
        return visual_analogue_svg(min_label, max_label)
    if variant == "nasa_tlx":
        return nasa_tlx_svg(dimension)
    if variant == "continuous_quality":
        return continuous_quality_svg()
    raise KeyError(variant)


def position_to_value(x: float, anchor_min_x: float, anchor_max_x: float) -> float:
    """Linear position between the anchors, clamped to [0, 1]."""
    if anchor_max_x == anchor_min_x:
        return 0.0
    return min(1.0, max(0.0, (x - anchor_min_x) / (anchor_max_x - anchor_min_x)))
