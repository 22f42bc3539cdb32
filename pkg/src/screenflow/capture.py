"""Behavioral telemetry: event records, media playback stats, free-hand input.

Events are what a session records about *how* a participant answered:
screen transitions, answer changes, window focus, and media playback. Media
events fold into per-asset playback statistics; free-hand strokes render to
a deterministic PNG that travels inside the CSV export as a Data URI.
"""

from __future__ import annotations

import base64
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from PIL import Image, ImageDraw

EVENT_KINDS = frozenset({
    "screen-shown", "screen-completed", "answer-changed",
    "focus-lost", "focus-gained",
    "media-play", "media-pause", "media-stall-start", "media-stall-end",
    "media-ended",
})

# Payload keys an event kind cannot do without.
_REQUIRED_PAYLOAD = {
    "answer-changed": ("item_id",),
    "screen-shown": ("screen_id",),
    "screen-completed": ("screen_id",),
    "media-play": ("asset_id",),
    "media-pause": ("asset_id",),
    "media-stall-start": ("asset_id",),
    "media-stall-end": ("asset_id",),
    "media-ended": ("asset_id",),
}

NON_MONOTONIC_FLAG = "non-monotonic"

STROKE_WIDTH_PX = 2  # fixed for deterministic rendering


class CaptureError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class BehavioralEvent:
    """One timestamped observation; t is milliseconds since session start."""

    kind: str
    t: int
    payload: dict[str, str] = field(default_factory=dict)
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.t < 0:
            raise ValueError("event timestamp must be >= 0")
        for key in _REQUIRED_PAYLOAD.get(self.kind, ()):
            if not self.payload.get(key):
                raise ValueError(f"{self.kind} event requires payload key {key!r}")
        for k, v in self.payload.items():
            if not isinstance(k, str) or not isinstance(v, str):
                raise ValueError("event payload must map strings to strings")

    def with_flag(self, flag: str) -> "BehavioralEvent":
        return BehavioralEvent(self.kind, self.t, dict(self.payload),
                               self.flags | {flag})

    def to_json(self) -> dict:
        return {"kind": self.kind, "t": self.t, "payload": dict(self.payload),
                "flags": sorted(self.flags)}

    @staticmethod
    def from_json(doc: dict) -> "BehavioralEvent":
        return BehavioralEvent(doc["kind"], doc["t"], dict(doc["payload"]),
                               frozenset(doc.get("flags", [])))


@dataclass(frozen=True)
class MediaStats:
    """Folded playback statistics for one asset within one session."""

    asset_id: str
    stall_count: int = 0
    total_stall_ms: int = 0
    playback_ms: int = 0
    completed: bool = False
    flags: frozenset[str] = frozenset()


def fold_media_stats(events: Sequence[BehavioralEvent], asset_id: str) -> MediaStats:
    """Single-pass fold of the media events for one asset.

    Matched stall-start/stall-end pairs sum into total_stall_ms; an
    unmatched stall-start is closed at the last event time of the log and
    flagged rather than dropped. The same closure rule applies to an open
    play interval. Duplicate starts and orphan ends are ignored but flagged.
    Events are consumed in list order; negative interval contributions
    (possible with non-monotonic timestamps) clamp to zero.
    """
    last_t = events[-1].t if events else 0
    stall_count = 0
    total_stall = 0
    playback = 0
    completed = False
    flags: set[str] = set()
    open_stall: int | None = None
    open_play: int | None = None

    for ev in events:
        if ev.payload.get("asset_id") != asset_id:
            continue
        if ev.kind == "media-play":
            if open_play is None:
                open_play = ev.t
            else:
                flags.add("duplicate-play")
        elif ev.kind == "media-pause":
            if open_play is not None:
                playback += max(0, ev.t - open_play)
                open_play = None
            else:
                flags.add("orphan-pause")
        elif ev.kind == "media-ended":
            completed = True
            if open_play is not None:
                playback += max(0, ev.t - open_play)
                open_play = None
        elif ev.kind == "media-stall-start":
            if open_stall is None:
                open_stall = ev.t
                stall_count += 1
            else:
                flags.add("overlapping-stall")
        elif ev.kind == "media-stall-end":
            if open_stall is not None:
                total_stall += max(0, ev.t - open_stall)
                open_stall = None
            else:
                flags.add("orphan-stall-end")

    if open_stall is not None:
        total_stall += max(0, last_t - open_stall)
        flags.add("unclosed-stall")
    if open_play is not None:
        playback += max(0, last_t - open_play)
        flags.add("unclosed-playback")
    return MediaStats(asset_id, stall_count, total_stall, playback, completed,
                      frozenset(flags))


# ---------------------------------------------------------------------------
# Free-hand input
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrokeSet:
    """Free-hand input: polylines of (x px, y px, t ms) on a canvas."""

    width_px: int
    height_px: int
    strokes: tuple[tuple[tuple[float, float, int], ...], ...] = ()

    def __post_init__(self):
        if self.width_px < 0 or self.height_px < 0:
            raise ValueError("canvas dimensions must be non-negative")
        for i, stroke in enumerate(self.strokes):
            last_t = None
            for x, y, t in stroke:
                if not (0 <= x < self.width_px and 0 <= y < self.height_px):
                    raise ValueError(
                        f"stroke {i} point ({x}, {y}) outside canvas "
                        f"{self.width_px}x{self.height_px}")
                if last_t is not None and t < last_t:
                    raise ValueError(f"stroke {i} timestamps must be non-decreasing")
                last_t = t

    def to_json(self) -> dict:
        return {"width_px": self.width_px, "height_px": self.height_px,
                "strokes": [[[x, y, t] for x, y, t in s] for s in self.strokes]}

    @staticmethod
    def from_json(doc: dict) -> "StrokeSet":
        return StrokeSet(doc["width_px"], doc["height_px"],
                         tuple(tuple((p[0], p[1], p[2]) for p in s)
                               for s in doc["strokes"]))


def strokes_to_image(strokes: StrokeSet) -> Image.Image:
    """Render black strokes on a white canvas, deterministically.

    Fixed 2 px line width with round caps and joints: a disc is stamped at
    every polyline vertex in addition to the connecting segments, so the
    same StrokeSet always produces the same pixels.
    """
    if strokes.width_px == 0 or strokes.height_px == 0:
        raise CaptureError("EMPTY_CANVAS", "canvas has zero width or height")
    image = Image.new("L", (strokes.width_px, strokes.height_px), 255)
    draw = ImageDraw.Draw(image)
    r = STROKE_WIDTH_PX / 2
    for stroke in strokes.strokes:
        points = [(x, y) for x, y, _ in stroke]
        if len(points) >= 2:
            draw.line(points, fill=0, width=STROKE_WIDTH_PX)
        for x, y in points:
            draw.ellipse((x - r, y - r, x + r, y + r), fill=0)
    return image


def png_bytes(image: Image.Image) -> bytes:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Data URIs
# ---------------------------------------------------------------------------

_SUPPORTED_MEDIA_TYPES = {"image/png": "PNG", "image/jpeg": "JPEG"}
_DATA_URI_RE = re.compile(r"^data:([a-z0-9.+-]+/[a-z0-9.+-]+);base64,([A-Za-z0-9+/=]*)$")


def image_to_data_uri(image: Image.Image | bytes, media_type: str = "image/png") -> str:
    """Base64 data: URI for an image, without line breaks.

    Accepts either already-encoded image bytes (used verbatim) or a PIL
    image, which is encoded to media_type first.
    """
    if media_type not in _SUPPORTED_MEDIA_TYPES:
        raise CaptureError("UNSUPPORTED_MEDIA_TYPE",
                           f"cannot encode media type {media_type!r}")
    if isinstance(image, bytes):
        payload = image
    else:
        buf = io.BytesIO()
        image.save(buf, format=_SUPPORTED_MEDIA_TYPES[media_type])
        payload = buf.getvalue()
    return f"data:{media_type};base64,{base64.b64encode(payload).decode('ascii')}"


def parse_data_uri(uri: str) -> tuple[str, bytes]:
    """Split a base64 data: URI into (media_type, payload bytes)."""
    m = _DATA_URI_RE.match(uri)
    if m is None:
        raise ValueError("not a base64 data: URI")
    return m.group(1), base64.b64decode(m.group(2), validate=True)


def strokes_to_data_uri(strokes: StrokeSet) -> str:
    return image_to_data_uri(strokes_to_image(strokes))


def iter_media_assets(events: Iterable[BehavioralEvent]) -> list[str]:
    """Asset ids that appear in media events, in first-seen order."""
    seen: list[str] = []
    for ev in events:
        if ev.kind.startswith("media-"):
            asset = ev.payload.get("asset_id", "")
            if asset and asset not in seen:
                seen.append(asset)
    return seen
