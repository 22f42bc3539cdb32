"""Construction-phase tooling: per-participant instances from a template.

A template is a questionnaire plus randomization directives, as JSON:

    {
      "questionnaire": { ...questionnaire document... },
      "randomization": {
        "permutation_groups": [["s2", "s3", "s4"]],
        "shuffle_items": ["s1"],
        "assignments": {"condition": ["A", "B"]}
      }
    }

Screens inside a permutation group are shuffled among the positions the
group occupies; everything else keeps its relative order. Items screens
listed in shuffle_items get their item order shuffled. Each assignment
placeholder picks one value from its list; `{{name}}` markers in titles,
questions, labels, commands, and asset URIs are replaced by the pick.

Randomness must reproduce anywhere, so it comes from splitmix64 (Steele,
Lea & Flood's 64-bit mixer) driving an unbiased Fisher-Yates shuffle, with
rejection sampling for the bounded draws. Per-purpose seeds derive from
SHA-256 over domain-separated inputs; both algorithms are small enough to
port exactly and are pinned by the test suite.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace

from . import diagnostics as dg
from . import qspec
from .diagnostics import Diagnostic, Severity
from .jsondoc import JsonSyntaxError, parse_document
from .qspec import ItemsScreen, QuestionnaireSpec

_MASK64 = (1 << 64) - 1
_PLACEHOLDER_RE = re.compile(r"\{\{([A-Za-z0-9_.-]+)\}\}")


class ConstructError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Deterministic randomness
# ---------------------------------------------------------------------------

class SplitMix64:
    """splitmix64 stream: state += 0x9E3779B97F4A7C15, output is mixed z."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform draw in [0, bound), unbiased via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % bound

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates, descending index order."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.below(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def choice(self, seq):
        return seq[self.below(len(seq))]


def _digest_seed(domain: bytes, *parts: bytes) -> int:
    h = hashlib.sha256(domain)
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return int.from_bytes(h.digest()[:8], "big")


def participant_seed(master_seed: int, participant_id: str) -> int:
    """Per-participant seed: first 8 bytes of a domain-separated SHA-256."""
    return _digest_seed(b"screenflow.seed.v1",
                        (master_seed & _MASK64).to_bytes(8, "big"),
                        participant_id.encode("utf-8"))


def _instance_seed(seed: int, participant_id: str) -> int:
    return _digest_seed(b"screenflow.instance.v1",
                        (seed & _MASK64).to_bytes(8, "big"),
                        participant_id.encode("utf-8"))


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

@dataclass
class TemplateSpec:
    base: QuestionnaireSpec
    permutation_groups: tuple[tuple[str, ...], ...] = ()
    shuffle_items: tuple[str, ...] = ()
    assignments: dict[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass
class TemplateParseResult:
    template: TemplateSpec | None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _spec_strings(spec: QuestionnaireSpec) -> list[str]:
    out = [spec.title]
    for screen in spec.screens:
        if isinstance(screen, ItemsScreen):
            for item in screen.items:
                out.append(item.question)
                scale = item.scale
                if isinstance(scale, qspec.CategoryRating):
                    out.extend(scale.labels)
                elif isinstance(scale, qspec.VisualAnalogue):
                    out.extend([scale.min_label, scale.max_label])
                elif isinstance(scale, qspec.NasaTlxSubscale):
                    out.append(scale.dimension)
        elif isinstance(screen, qspec.RemoteCommandScreen):
            out.append(screen.command)
    out.extend(a.uri for a in spec.assets)
    return out


def validate_template(template: TemplateSpec) -> list[Diagnostic]:
    return list(qspec.validate(template.base)) + _validate_randomization(template)


def _validate_randomization(template: TemplateSpec) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    screen_ids = set(template.base.screen_ids())
    seen: set[str] = set()
    for gi, group in enumerate(template.permutation_groups):
        for sid in group:
            if sid not in screen_ids:
                diags.append(Diagnostic(
                    dg.DANGLING_SCREEN_REF,
                    f"permutation group references unknown screen '{sid}'",
                    Severity.ERROR, f"randomization.permutation_groups[{gi}]"))
            if sid in seen:
                diags.append(Diagnostic(
                    dg.OVERLAPPING_GROUPS,
                    f"screen '{sid}' appears in more than one permutation group",
                    Severity.ERROR, f"randomization.permutation_groups[{gi}]"))
            seen.add(sid)
    for sid in template.shuffle_items:
        target = next((s for s in template.base.screens if s.screen_id == sid), None)
        if target is None:
            diags.append(Diagnostic(
                dg.DANGLING_SCREEN_REF,
                f"shuffle_items references unknown screen '{sid}'",
                Severity.ERROR, "randomization.shuffle_items"))
        elif not isinstance(target, ItemsScreen):
            diags.append(Diagnostic(
                dg.BAD_VALUE, f"shuffle_items target '{sid}' is not an items screen",
                Severity.ERROR, "randomization.shuffle_items"))
    for name, values in template.assignments.items():
        if not values:
            diags.append(Diagnostic(
                dg.BAD_VALUE, f"assignment '{name}' has an empty value list",
                Severity.ERROR, f"randomization.assignments.{name}"))
    bound = set(template.assignments)
    for text in _spec_strings(template.base):
        for name in _PLACEHOLDER_RE.findall(text):
            if name not in bound:
                diags.append(Diagnostic(
                    dg.UNBOUND_PLACEHOLDER,
                    f"placeholder '{{{{{name}}}}}' has no assignment value list",
                    Severity.ERROR, "randomization.assignments"))
    return diags


def parse_template(document: bytes | str) -> TemplateParseResult:
    try:
        root = parse_document(document)
    except JsonSyntaxError as exc:
        return TemplateParseResult(None, [Diagnostic(
            dg.SYNTAX_ERROR, exc.reason, Severity.ERROR, "", exc.line, exc.column)])
    if not isinstance(root.value, dict):
        return TemplateParseResult(None, [Diagnostic(
            dg.WRONG_TYPE, "template must be an object", Severity.ERROR,
            "", root.line, root.column)])
    diags: list[Diagnostic] = []
    q_node = root.value.get("questionnaire")
    if q_node is None:
        return TemplateParseResult(None, [Diagnostic(
            dg.MISSING_FIELD, "missing required field 'questionnaire'",
            Severity.ERROR, "questionnaire", root.line, root.column)])
    result = qspec.parse_spec(json.dumps(q_node.plain()))
    diags.extend(result.diagnostics)
    if result.spec is None:
        return TemplateParseResult(None, diags)

    groups: list[tuple[str, ...]] = []
    shuffle: list[str] = []
    assignments: dict[str, tuple[str, ...]] = {}
    r_node = root.value.get("randomization")
    if r_node is not None:
        if not isinstance(r_node.value, dict):
            diags.append(Diagnostic(dg.WRONG_TYPE, "randomization must be an object",
                                    Severity.ERROR, "randomization",
                                    r_node.line, r_node.column))
            return TemplateParseResult(None, diags)
        plain = r_node.plain()
        pg = plain.get("permutation_groups", [])
        si = plain.get("shuffle_items", [])
        asg = plain.get("assignments", {})
        if (not isinstance(pg, list)
                or any(not isinstance(g, list)
                       or any(not isinstance(s, str) for s in g) for g in pg)):
            diags.append(Diagnostic(dg.WRONG_TYPE,
                                    "permutation_groups must be arrays of screen ids",
                                    Severity.ERROR, "randomization.permutation_groups"))
        else:
            groups = [tuple(g) for g in pg]
        if not isinstance(si, list) or any(not isinstance(s, str) for s in si):
            diags.append(Diagnostic(dg.WRONG_TYPE,
                                    "shuffle_items must be an array of screen ids",
                                    Severity.ERROR, "randomization.shuffle_items"))
        else:
            shuffle = list(si)
        if (not isinstance(asg, dict)
                or any(not isinstance(v, list)
                       or any(not isinstance(x, str) for x in v) for v in asg.values())):
            diags.append(Diagnostic(dg.WRONG_TYPE,
                                    "assignments must map names to string arrays",
                                    Severity.ERROR, "randomization.assignments"))
        else:
            assignments = {k: tuple(v) for k, v in asg.items()}
        known = {"permutation_groups", "shuffle_items", "assignments"}
        for key in plain:
            if key not in known:
                diags.append(Diagnostic(dg.UNKNOWN_FIELD, f"unknown field '{key}'",
                                        Severity.WARNING, f"randomization.{key}"))
    if dg.errors(diags):
        return TemplateParseResult(None, diags)
    template = TemplateSpec(result.spec, tuple(groups), tuple(shuffle), assignments)
    diags.extend(_validate_randomization(template))
    if dg.errors(diags):
        return TemplateParseResult(None, diags)
    return TemplateParseResult(template, diags)


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def _substitute(text: str, picks: dict[str, str]) -> str:
    return _PLACEHOLDER_RE.sub(lambda m: picks.get(m.group(1), m.group(0)), text)


def _substitute_scale(scale, picks):
    if isinstance(scale, qspec.CategoryRating):
        return qspec.CategoryRating(tuple(_substitute(x, picks) for x in scale.labels))
    if isinstance(scale, qspec.VisualAnalogue):
        return qspec.VisualAnalogue(_substitute(scale.min_label, picks),
                                    _substitute(scale.max_label, picks))
    if isinstance(scale, qspec.NasaTlxSubscale):
        return qspec.NasaTlxSubscale(_substitute(scale.dimension, picks))
    return scale


def _substitute_spec(spec: QuestionnaireSpec, picks: dict[str, str]) -> QuestionnaireSpec:
    screens = []
    for screen in spec.screens:
        if isinstance(screen, ItemsScreen):
            items = tuple(replace(item,
                                  question=_substitute(item.question, picks),
                                  scale=_substitute_scale(item.scale, picks))
                          for item in screen.items)
            screens.append(replace(screen, items=items))
        elif isinstance(screen, qspec.RemoteCommandScreen):
            screens.append(replace(screen, command=_substitute(screen.command, picks)))
        else:
            screens.append(screen)
    assets = tuple(replace(a, uri=_substitute(a.uri, picks)) for a in spec.assets)
    return replace(spec, title=_substitute(spec.title, picks),
                   screens=tuple(screens), assets=assets)


def instantiate(template: TemplateSpec, participant_id: str, seed: int) -> QuestionnaireSpec:
    """Build one participant's questionnaire; pure in its three arguments.

    The random stream is consumed in a fixed order: permutation groups in
    declaration order, then item shuffles in declaration order, then
    assignments in sorted placeholder order.
    """
    diags = validate_template(template)
    if dg.errors(diags):
        raise ConstructError("INVALID_TEMPLATE",
                             "; ".join(d.message for d in dg.errors(diags)))
    rng = SplitMix64(_instance_seed(seed, participant_id))
    screens = list(template.base.screens)
    for group in template.permutation_groups:
        member_set = set(group)
        slots = [i for i, s in enumerate(screens) if s.screen_id in member_set]
        members = [screens[i] for i in slots]
        rng.shuffle(members)
        for slot, screen in zip(slots, members):
            screens[slot] = screen
    for sid in template.shuffle_items:
        idx = next(i for i, s in enumerate(screens) if s.screen_id == sid)
        target = screens[idx]
        assert isinstance(target, ItemsScreen)
        items = list(target.items)
        rng.shuffle(items)
        screens[idx] = replace(target, items=tuple(items))
    picks = {name: rng.choice(list(template.assignments[name]))
             for name in sorted(template.assignments)}
    spec = _substitute_spec(replace(template.base, screens=tuple(screens)), picks)
    return spec


@dataclass
class BatchEntry:
    participant_id: str
    seed: int
    spec: QuestionnaireSpec


@dataclass
class BatchPlan:
    entries: list[BatchEntry]

    def manifest_rows(self) -> list[tuple[str, str, str]]:
        return [(e.participant_id, str(e.seed), qspec.spec_digest(e.spec))
                for e in self.entries]

    def manifest_csv(self) -> bytes:
        from .export import write_rows
        return write_rows([("participant_id", "seed", "spec_digest")]
                          + self.manifest_rows())


def plan_batch(template: TemplateSpec, participant_ids: list[str],
               master_seed: int) -> BatchPlan:
    """Instantiate a whole batch with per-participant derived seeds.

    Rerunning with the same master seed reproduces every spec and the
    manifest byte for byte.
    """
    seen: set[str] = set()
    for pid in participant_ids:
        if pid in seen:
            raise ConstructError("DUPLICATE_PARTICIPANT",
                                 f"participant id {pid!r} appears twice")
        seen.add(pid)
    entries = []
    for pid in participant_ids:
        seed = participant_seed(master_seed, pid)
        entries.append(BatchEntry(pid, seed, instantiate(template, pid, seed)))
    return BatchPlan(entries)
