"""Printable layout: a questionnaire as a single self-contained HTML file.

One page per items screen, in the order screens appear in the document;
wait, media, and remote-command screens become instruction placeholder
pages with no input fields; export screens produce no page. Graphical
scales embed the identical SVG the browser UI renders, so a printed sheet
is a faithful paper fallback.
"""

from __future__ import annotations

import html
from dataclasses import dataclass, field
from typing import Callable

from . import diagnostics as dg
from . import qspec, scales
from .diagnostics import Diagnostic, Severity

# Usable area of an A4 sheet at 96 dpi with the stylesheet's margins.
PAGE_WIDTH_PX = 700
PAGE_HEIGHT_PX = 980

_STYLE = """
body { font-family: sans-serif; margin: 0; }
.sheet { page-break-after: always; padding: 40px; min-height: 10cm; }
.sheet h2 { font-size: 16px; border-bottom: 1px solid #888; padding-bottom: 6px; }
.item { margin: 24px 0; }
.question { font-size: 14px; margin-bottom: 10px; }
.options label { display: block; margin: 4px 0; font-size: 13px; }
.freetext { border: 1px solid #444; height: 120px; }
.freehand { border: 1px solid #444; }
.placeholder { color: #444; font-style: italic; font-size: 14px;
               margin-top: 80px; text-align: center; }
.meta { color: #777; font-size: 10px; margin-top: 30px; }
"""


@dataclass
class PrintResult:
    document: str
    diagnostics: list[Diagnostic] = field(default_factory=list)


AssetLoader = Callable[[str], "bytes | None"]


def _scale_markup(item: qspec.ItemSpec, diags: list[Diagnostic],
                  spec: qspec.QuestionnaireSpec, path: str,
                  asset_loader: AssetLoader | None) -> str:
    scale = item.scale
    if isinstance(scale, qspec.CategoryRating):
        options = "".join(
            f'<label>&#9744; {html.escape(label)}</label>' for label in scale.labels)
        return f'<div class="options">{options}</div>'
    if isinstance(scale, qspec.VisualAnalogue):
        return scales.visual_analogue_svg(scale.min_label, scale.max_label)
    if isinstance(scale, qspec.NasaTlxSubscale):
        return scales.nasa_tlx_svg(scale.dimension)
    if isinstance(scale, qspec.ContinuousQuality):
        return scales.continuous_quality_svg()
    if isinstance(scale, qspec.FreeText):
        return '<div class="freetext"></div>'
    if isinstance(scale, qspec.FreeHand):
        if scale.width_px > PAGE_WIDTH_PX or scale.height_px > PAGE_HEIGHT_PX:
            diags.append(Diagnostic(
                dg.UNPRINTABLE_SCALE,
                f"free_hand canvas {scale.width_px}x{scale.height_px} exceeds the "
                f"printable page ({PAGE_WIDTH_PX}x{PAGE_HEIGHT_PX})",
                Severity.WARNING, path))
        return (f'<div class="freehand" style="width:{scale.width_px}px;'
                f'height:{scale.height_px}px"></div>')
    # custom_svg: embed the researcher's asset when it can be loaded
    asset = spec.asset(scale.svg_asset_id)
    data = asset_loader(asset.uri) if (asset_loader and asset) else None
    if data is None:
        diags.append(Diagnostic(
            dg.ASSET_NOT_AVAILABLE,
            f"custom svg asset '{scale.svg_asset_id}' not available for printing",
            Severity.WARNING, path))
        return '<div class="freehand" style="width:420px;height:90px"></div>'
    return data.decode("utf-8", errors="replace")


def print_layout(spec: qspec.QuestionnaireSpec,
                 asset_loader: AssetLoader | None = None) -> PrintResult:
    """Render a valid spec as a paginated, static HTML document."""
    diags: list[Diagnostic] = []
    pages: list[str] = []
    for si, screen in enumerate(spec.screens):
        if isinstance(screen, qspec.ExportScreen):
            continue
        body: list[str] = [f"<h2>{html.escape(spec.title)}</h2>"]
        if isinstance(screen, qspec.ItemsScreen):
            for ii, item in enumerate(screen.items):
                markup = _scale_markup(item, diags, spec,
                                       f"screens[{si}].items[{ii}]", asset_loader)
                body.append(
                    f'<div class="item"><div class="question">'
                    f'{html.escape(item.question)}'
                    f'{" *" if item.required else ""}</div>{markup}</div>')
        elif isinstance(screen, qspec.WaitScreen):
            seconds = screen.duration_ms / 1000
            body.append(f'<div class="placeholder">Pause here for '
                        f'{seconds:g} seconds, then continue.</div>')
        elif isinstance(screen, qspec.MediaScreen):
            body.append(f'<div class="placeholder">Stimulus playback: '
                        f'{html.escape(screen.asset_id)} (administered by the '
                        f'experimenter).</div>')
        else:
            body.append(f'<div class="placeholder">Operator step: '
                        f'{html.escape(screen.command)}</div>')
        body.append(f'<div class="meta">{html.escape(spec.spec_id)} '
                    f'v{html.escape(spec.version)} &middot; sheet '
                    f'{html.escape(screen.screen_id)}</div>')
        pages.append(f'<div class="sheet">{"".join(body)}</div>')
    document = (
        "<!doctype html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(spec.title)}</title>"
        f"<style>{_STYLE}</style></head><body>"
        + "".join(pages)
        + "</body></html>\n"
    )
    return PrintResult(document, diags)


def page_count(spec: qspec.QuestionnaireSpec) -> int:
    """Pages print_layout will emit: every screen except export screens."""
    return sum(1 for s in spec.screens if not isinstance(s, qspec.ExportScreen))
