"""Session state machine: one active screen, gated advancing, routed next.

A Session executes one participant's run through a questionnaire. Exactly
one screen is active while the session is in progress; advancing past the
last screen completes it. Required items gate advancing, wait screens gate
on elapsed time, media screens gate on playback having ended. The next
screen after an advance is picked by the highest-priority routing rule
whose condition holds over the answers given so far, falling through to
the next screen in document order.

All mutating calls on one Session must be externally serialized; separate
sessions are independent.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable

from . import qspec
from .capture import NON_MONOTONIC_FLAG, BehavioralEvent
from .diagnostics import errors as diag_errors
from .qspec import (
    CategoryRating,
    CustomSvg,
    FreeHand,
    FreeText,
    ItemsScreen,
    MediaScreen,
    QuestionnaireSpec,
    WaitScreen,
)

SNAPSHOT_FORMAT = "screenflow-session"
SNAPSHOT_VERSION = 1

#: Continuous answers quantize to this many steps across [0, 1], so their
#: decimal form is exact and identical across implementations.
CONTINUOUS_STEPS = 10000


class EngineError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Answer values
# ---------------------------------------------------------------------------

def canonical_decimal(steps: int) -> str:
    """Render steps/10000 as a minimal decimal string ("0", "0.5", "0.0001")."""
    whole, frac = divmod(steps, CONTINUOUS_STEPS)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:04d}".rstrip("0")


@dataclass(frozen=True)
class Category:
    index: int


@dataclass(frozen=True)
class Continuous:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("continuous answers live in [0, 1]")
        steps = int(self.value * CONTINUOUS_STEPS + 0.5)
        object.__setattr__(self, "value", steps / CONTINUOUS_STEPS)

    @property
    def steps(self) -> int:
        return int(self.value * CONTINUOUS_STEPS + 0.5)

    @property
    def decimal(self) -> str:
        return canonical_decimal(self.steps)


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class ImageAnswer:
    data_uri: str


AnswerValue = Category | Continuous | Text | ImageAnswer


def answer_to_json(value: AnswerValue) -> dict:
    if isinstance(value, Category):
        return {"type": "category", "index": value.index}
    if isinstance(value, Continuous):
        # Encoded as a string: avoids float-formatting differences between
        # implementations writing the same CSV cells.
        return {"type": "continuous", "value": value.decimal}
    if isinstance(value, Text):
        return {"type": "text", "text": value.text}
    return {"type": "image", "data_uri": value.data_uri}


def answer_from_json(doc: dict) -> AnswerValue:
    kind = doc.get("type")
    if kind == "category":
        return Category(int(doc["index"]))
    if kind == "continuous":
        return Continuous(float(doc["value"]))
    if kind == "text":
        return Text(doc["text"])
    if kind == "image":
        return ImageAnswer(doc["data_uri"])
    raise ValueError(f"unknown answer type {kind!r}")


def comparable(value: AnswerValue) -> int | float | str | None:
    """Primitive used by routing comparisons; images are not comparable."""
    if isinstance(value, Category):
        return value.index
    if isinstance(value, Continuous):
        return value.value
    if isinstance(value, Text):
        return value.text
    return None


def condition_holds(cond: qspec.Condition, answers: dict[str, AnswerValue]) -> bool:
    answer = answers.get(cond.item_id)
    if cond.comparator == "answered":
        return answer is not None
    if cond.comparator == "unanswered":
        return answer is None
    if answer is None:
        return False
    value = comparable(answer)
    if value is None or cond.literal is None:
        return False
    lit = cond.literal
    if cond.comparator == "eq":
        return _same_kind(value, lit) and value == lit
    if cond.comparator == "ne":
        return not (_same_kind(value, lit) and value == lit)
    if not _same_kind(value, lit):
        return False
    if cond.comparator == "lt":
        return value < lit
    if cond.comparator == "le":
        return value <= lit
    if cond.comparator == "gt":
        return value > lit
    return value >= lit


def _same_kind(a, b) -> bool:
    numeric = (int, float)
    if isinstance(a, numeric) and isinstance(b, numeric):
        return True
    return isinstance(a, str) and isinstance(b, str)


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------

def _default_clock() -> int:
    return int(time.monotonic() * 1000)


@dataclass
class Session:
    spec: QuestionnaireSpec
    session_id: str
    participant_id: str
    seed: int
    status: str  # created | in_progress | completed | aborted
    cursor: int
    answers: dict[str, AnswerValue] = field(default_factory=dict)
    revisions: dict[str, int] = field(default_factory=dict)
    answer_times: dict[str, int] = field(default_factory=dict)
    events: list[BehavioralEvent] = field(default_factory=list)
    screen_entry_times: dict[str, int] = field(default_factory=dict)
    started_wallclock_ms: int = 0
    clock: Callable[[], int] | None = field(default=None, compare=False, repr=False)
    clock_origin: int = field(default=0, compare=False, repr=False)

    # -- helpers ------------------------------------------------------------

    def now(self) -> int:
        clock = self.clock or _default_clock
        return clock() - self.clock_origin

    def active_screen(self) -> qspec.ScreenSpec:
        return self.spec.screens[self.cursor]

    def _require_active(self) -> None:
        if self.status != "in_progress":
            raise EngineError("SESSION_NOT_ACTIVE",
                              f"session is {self.status}, not in_progress")

    def _append_event(self, event: BehavioralEvent) -> None:
        if self.events and event.t < self.events[-1].t:
            event = event.with_flag(NON_MONOTONIC_FLAG)
        self.events.append(event)

    # -- operations ---------------------------------------------------------

    def submit_answer(self, item_id: str, value: AnswerValue, at: int) -> None:
        """Store an answer for an item on the active screen.

        Resubmitting overwrites the value and bumps the item's revision
        count; every submission appends an answer-changed event.
        """
        self._require_active()
        screen = self.active_screen()
        if not isinstance(screen, ItemsScreen):
            raise EngineError("ITEM_NOT_ON_ACTIVE_SCREEN",
                              f"active screen '{screen.screen_id}' has no items")
        item = next((it for it in screen.items if it.item_id == item_id), None)
        if item is None:
            raise EngineError("ITEM_NOT_ON_ACTIVE_SCREEN",
                              f"item '{item_id}' is not on screen '{screen.screen_id}'")
        _check_value(item, value)
        self.answers[item_id] = value
        self.revisions[item_id] = self.revisions.get(item_id, 0) + 1
        self.answer_times[item_id] = at
        self._append_event(BehavioralEvent(
            "answer-changed", at,
            {"item_id": item_id, "screen_id": screen.screen_id,
             "revision": str(self.revisions[item_id])}))

    def record_event(self, event: BehavioralEvent) -> None:
        self._require_active()
        self._append_event(event)

    def screen_ready(self, at: int | None = None) -> bool:
        """True when the active screen no longer blocks advancing."""
        if self.status != "in_progress":
            return False
        screen = self.active_screen()
        if isinstance(screen, ItemsScreen):
            return all(it.item_id in self.answers
                       for it in screen.items if it.required)
        if isinstance(screen, WaitScreen):
            now = self.now() if at is None else at
            entered = self.screen_entry_times.get(screen.screen_id, 0)
            return now - entered >= screen.duration_ms
        if isinstance(screen, MediaScreen):
            if not screen.autoplay:
                return True
            entered = self.screen_entry_times.get(screen.screen_id, 0)
            return any(ev.kind == "media-ended"
                       and ev.payload.get("asset_id") == screen.asset_id
                       and ev.t >= entered
                       for ev in self.events)
        return True  # export and remote_command screens never block

    def advance(self, at: int) -> None:
        """Complete the active screen and move to the routed next one."""
        self._require_active()
        if not self.screen_ready(at):
            raise EngineError("NOT_READY",
                              "active screen still blocks advancing")
        screen = self.active_screen()
        self._append_event(BehavioralEvent(
            "screen-completed", at, {"screen_id": screen.screen_id}))
        target = _route(self.spec, screen.screen_id, self.answers)
        next_index = self.cursor + 1 if target is None else self.spec.screen_index(target)
        if next_index >= len(self.spec.screens):
            self.status = "completed"
            return
        self.cursor = next_index
        shown = self.spec.screens[next_index]
        self.screen_entry_times[shown.screen_id] = at
        self._append_event(BehavioralEvent(
            "screen-shown", at, {"screen_id": shown.screen_id}))

    def abort(self) -> None:
        """Mark the session aborted; no further mutations are accepted."""
        self._require_active()
        self.status = "aborted"

    # -- snapshot -----------------------------------------------------------

    def snapshot(self) -> bytes:
        """Self-contained, versioned encoding, restorable with restore()."""
        doc = {
            "format": SNAPSHOT_FORMAT,
            "format_version": SNAPSHOT_VERSION,
            "spec": qspec.spec_to_doc(self.spec),
            "session": {
                "session_id": self.session_id,
                "participant_id": self.participant_id,
                "seed": self.seed,
                "status": self.status,
                "cursor": self.cursor,
                "answers": {k: answer_to_json(v) for k, v in self.answers.items()},
                "revisions": dict(self.revisions),
                "answer_times": dict(self.answer_times),
                "events": [ev.to_json() for ev in self.events],
                "screen_entry_times": dict(self.screen_entry_times),
                "started_wallclock_ms": self.started_wallclock_ms,
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False).encode("utf-8")


def _check_value(item: qspec.ItemSpec, value: AnswerValue) -> None:
    scale = item.scale
    code = "TYPE_MISMATCH"
    if isinstance(scale, CategoryRating):
        if not isinstance(value, Category):
            raise EngineError(code, f"item '{item.item_id}' takes a category answer")
        if not 0 <= value.index < len(scale.labels):
            raise EngineError(code, f"category index {value.index} out of range")
    elif isinstance(scale, FreeText):
        if not isinstance(value, Text):
            raise EngineError(code, f"item '{item.item_id}' takes a text answer")
        if len(value.text) > scale.max_length:
            raise EngineError(code, f"text exceeds max_length {scale.max_length}")
    elif isinstance(scale, FreeHand):
        if not isinstance(value, ImageAnswer):
            raise EngineError(code, f"item '{item.item_id}' takes an image answer")
        if not value.data_uri.startswith("data:"):
            raise EngineError(code, "image answers must be data: URIs")
    else:
        if not isinstance(value, Continuous):
            raise EngineError(code, f"item '{item.item_id}' takes a continuous answer")
        if isinstance(scale, CustomSvg) and not scale.value_min < scale.value_max:
            raise EngineError(code, "corrupt custom_svg scale")


def _route(spec: QuestionnaireSpec, after_screen: str,
           answers: dict[str, AnswerValue]) -> str | None:
    """Target of the highest-priority matching rule, or None to fall through."""
    best: qspec.RoutingRule | None = None
    for rule in spec.routing:
        if rule.after_screen != after_screen:
            continue
        if best is not None and rule.priority <= best.priority:
            continue
        if condition_holds(rule.condition, answers):
            best = rule
    return best.goto_screen if best else None


def create_session(spec: QuestionnaireSpec, participant_id: str, seed: int,
                   clock: Callable[[], int] | None = None,
                   wallclock_ms: int | None = None) -> Session:
    """Start a session on a valid spec; the first screen becomes active.

    The clock is a monotonic millisecond source used when callers do not
    pass explicit timestamps; wall-clock time is recorded once, at start,
    for aligning sessions across devices.
    """
    if diag_errors(qspec.validate(spec)):
        raise EngineError("INVALID_SPEC", "spec has validation errors")
    origin = (clock or _default_clock)()
    session = Session(
        spec=spec,
        session_id=uuid.uuid4().hex,
        participant_id=participant_id,
        seed=seed & (2**64 - 1),
        status="in_progress",
        cursor=0,
        started_wallclock_ms=(int(time.time() * 1000)
                              if wallclock_ms is None else wallclock_ms),
        clock=clock,
        clock_origin=origin,
    )
    first = spec.screens[0]
    session.screen_entry_times[first.screen_id] = 0
    session._append_event(BehavioralEvent(
        "screen-shown", 0, {"screen_id": first.screen_id}))
    return session


def restore(data: bytes, clock: Callable[[], int] | None = None) -> Session:
    """Rebuild a session from snapshot(); raises CORRUPT_SNAPSHOT on damage."""
    try:
        doc = json.loads(data.decode("utf-8"))
        if doc.get("format") != SNAPSHOT_FORMAT:
            raise ValueError("not a session snapshot")
        if doc.get("format_version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {doc.get('format_version')}")
        result = qspec.parse_spec(json.dumps(doc["spec"]))
        if result.spec is None:
            raise ValueError("embedded spec does not validate")
        s = doc["session"]
        session = Session(
            spec=result.spec,
            session_id=s["session_id"],
            participant_id=s["participant_id"],
            seed=int(s["seed"]),
            status=s["status"],
            cursor=int(s["cursor"]),
            answers={k: answer_from_json(v) for k, v in s["answers"].items()},
            revisions={k: int(v) for k, v in s["revisions"].items()},
            answer_times={k: int(v) for k, v in s["answer_times"].items()},
            events=[BehavioralEvent.from_json(e) for e in s["events"]],
            screen_entry_times={k: int(v) for k, v in s["screen_entry_times"].items()},
            started_wallclock_ms=int(s["started_wallclock_ms"]),
            clock=clock,
        )
        if session.status not in ("created", "in_progress", "completed", "aborted"):
            raise ValueError(f"bad status {session.status!r}")
        if not 0 <= session.cursor < len(result.spec.screens):
            raise ValueError("cursor out of range")
        for item_id in session.answers:
            if result.spec.item(item_id) is None:
                raise ValueError(f"answer for unknown item {item_id!r}")
        return session
    except EngineError:
        raise
    except Exception as exc:
        raise EngineError("CORRUPT_SNAPSHOT", f"cannot restore session: {exc}") from exc


def time_to_answer(events: list[BehavioralEvent], item_id: str) -> int | None:
    """First answer-changed(item) minus the screen-shown that preceded it.

    Recomputable from the event log alone; returns None if the item was
    never answered or its screen-shown event is missing.
    """
    for idx, ev in enumerate(events):
        if ev.kind == "answer-changed" and ev.payload.get("item_id") == item_id:
            screen_id = ev.payload.get("screen_id")
            shown = None
            for prior in events[:idx]:
                if (prior.kind == "screen-shown"
                        and prior.payload.get("screen_id") == screen_id):
                    shown = prior.t
            if shown is None:
                return None
            return ev.t - shown
    return None
