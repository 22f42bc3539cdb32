"""Independent re-implementations used as test oracles.

Everything in here deliberately works on plain dicts/tuples and avoids the
library's own code paths, so a bug in the implementation cannot hide in
the oracle that checks it.
"""

from __future__ import annotations


def _comparable(value_doc: dict):
    kind = value_doc["type"]
    if kind == "category":
        return value_doc["index"]
    if kind == "continuous":
        # Mirror the documented quantization: floor(v * 10000 + 0.5) steps.
        v = float(value_doc["value"])
        return int(v * 10000 + 0.5) / 10000
    if kind == "text":
        return value_doc["text"]
    return None  # images never compare


def _condition_true(cond: dict, answers: dict[str, dict]) -> bool:
    answer = answers.get(cond["item_id"])
    comparator = cond["comparator"]
    if comparator == "answered":
        return answer is not None
    if comparator == "unanswered":
        return answer is None
    if answer is None:
        return False
    value = _comparable(answer)
    literal = cond.get("literal")
    if value is None or literal is None:
        return False
    both_numbers = (isinstance(value, (int, float)) and not isinstance(value, bool)
                    and isinstance(literal, (int, float))
                    and not isinstance(literal, bool))
    both_strings = isinstance(value, str) and isinstance(literal, str)
    if not (both_numbers or both_strings):
        return False if comparator != "ne" else True
    if comparator == "eq":
        return value == literal
    if comparator == "ne":
        return value != literal
    if comparator == "lt":
        return value < literal
    if comparator == "le":
        return value <= literal
    if comparator == "gt":
        return value > literal
    return value >= literal


def route_interpreter(doc: dict, trace: list[dict]) -> list[str]:
    """Brute-force replay of a session over the raw questionnaire document.

    Consumes the trace one screen visit at a time and returns the full
    sequence of visited screen ids, finishing when the run walks off the
    end of the screen list. Raises if the trace disagrees with the route.
    """
    screens = doc["screens"]
    index_of = {s["screen_id"]: i for i, s in enumerate(screens)}
    rules_by_screen: dict[str, list[dict]] = {}
    for rule in doc.get("routing", []):
        rules_by_screen.setdefault(rule["after_screen"], []).append(rule)
    for rules in rules_by_screen.values():
        rules.sort(key=lambda r: -r["priority"])

    answers: dict[str, dict] = {}
    visited: list[str] = []
    idx = 0
    for visit in trace:
        screen = screens[idx]
        if visit["screen_id"] != screen["screen_id"]:
            raise AssertionError(
                f"trace visits {visit['screen_id']} but route is at "
                f"{screen['screen_id']}")
        visited.append(screen["screen_id"])
        for submission in visit["answers"]:
            answers[submission["item_id"]] = submission["value"]
        nxt = None
        for rule in rules_by_screen.get(screen["screen_id"], []):
            if _condition_true(rule["condition"], answers):
                nxt = index_of[rule["goto_screen"]]
                break
        idx = idx + 1 if nxt is None else nxt
        if idx >= len(screens):
            return visited
    raise AssertionError("trace ended before the route completed")


def brute_force_media_stats(events: list[tuple[str, int, str]], asset_id: str) -> dict:
    """Interval-sweep recomputation of media statistics.

    events: (kind, t, asset_id) tuples in log order. Builds explicit
    interval lists first, then sums them: a different algorithm from the
    single-pass fold it checks.
    """
    last_t = events[-1][1] if events else 0
    mine = [(k, t) for k, t, a in events if a == asset_id]

    stall_intervals: list[tuple[int, int | None]] = []
    play_intervals: list[tuple[int, int | None]] = []
    completed = False
    for kind, t in mine:
        if kind == "media-stall-start":
            if not (stall_intervals and stall_intervals[-1][1] is None):
                stall_intervals.append((t, None))
        elif kind == "media-stall-end":
            if stall_intervals and stall_intervals[-1][1] is None:
                stall_intervals[-1] = (stall_intervals[-1][0], t)
        elif kind == "media-play":
            if not (play_intervals and play_intervals[-1][1] is None):
                play_intervals.append((t, None))
        elif kind in ("media-pause", "media-ended"):
            if kind == "media-ended":
                completed = True
            if play_intervals and play_intervals[-1][1] is None:
                play_intervals[-1] = (play_intervals[-1][0], t)

    def total(intervals: list[tuple[int, int | None]]) -> int:
        s = 0
        for start, end in intervals:
            stop = last_t if end is None else end
            s += max(0, stop - start)
        return s

    return {
        "stall_count": len(stall_intervals),
        "total_stall_ms": total(stall_intervals),
        "playback_ms": total(play_intervals),
        "completed": completed,
    }
