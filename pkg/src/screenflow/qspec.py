"""Declarative questionnaire documents: types, parsing, validation.

A questionnaire is a JSON document (UTF-8) with this shape:

    {
      "spec_id": "demo", "version": "1.0", "title": "Demo",
      "screens": [
        {"screen_id": "s1", "kind": "items", "items": [
          {"item_id": "q1", "question": "Overall quality?", "required": true,
           "scale": {"variant": "category_rating", "labels": ["bad", "good"]}}
        ]},
        {"screen_id": "s2", "kind": "wait", "duration_ms": 1000},
        {"screen_id": "s3", "kind": "media", "asset_id": "clip1",
         "autoplay": true, "preload": true},
        {"screen_id": "s4", "kind": "remote_command", "command": "cond A"},
        {"screen_id": "s5", "kind": "export", "target": "upload"}
      ],
      "routing": [
        {"after_screen": "s1",
         "condition": {"item_id": "q1", "comparator": "eq", "literal": 0},
         "goto_screen": "s5", "priority": 10}
      ],
      "assets": [
        {"asset_id": "clip1", "media_type": "video/mp4",
         "uri": "clip1.mp4", "preload": true}
      ]
    }

Scale variants: category_rating (labels), visual_analogue (min_label,
max_label), nasa_tlx (dimension), continuous_quality (no parameters),
free_text (max_length), free_hand (width_px, height_px), custom_svg
(svg_asset_id, value_min, value_max).

Comparators: eq ne lt le gt ge answered unanswered. For answered and
unanswered the literal must be null or omitted.

serialize_spec produces the one canonical serialization (fixed key order,
two-space indent, LF, trailing newline); parse_spec(serialize_spec(s))
reconstructs s exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import diagnostics as dg
from .diagnostics import Diagnostic, Severity
from .jsondoc import JsonSyntaxError, Node, parse_document

COMPARATORS = ("eq", "ne", "lt", "le", "gt", "ge", "answered", "unanswered")
EXPORT_TARGETS = ("upload", "download", "upload-then-download-fallback")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CategoryRating:
    labels: tuple[str, ...]
    VARIANT = "category_rating"


@dataclass(frozen=True)
class VisualAnalogue:
    min_label: str
    max_label: str
    VARIANT = "visual_analogue"


@dataclass(frozen=True)
class NasaTlxSubscale:
    dimension: str
    VARIANT = "nasa_tlx"


@dataclass(frozen=True)
class ContinuousQuality:
    VARIANT = "continuous_quality"


@dataclass(frozen=True)
class FreeText:
    max_length: int = 1000
    VARIANT = "free_text"


@dataclass(frozen=True)
class FreeHand:
    width_px: int
    height_px: int
    VARIANT = "free_hand"


@dataclass(frozen=True)
class CustomSvg:
    svg_asset_id: str
    value_min: float
    value_max: float
    VARIANT = "custom_svg"


ScaleSpec = (
    CategoryRating
    | VisualAnalogue
    | NasaTlxSubscale
    | ContinuousQuality
    | FreeText
    | FreeHand
    | CustomSvg
)

#: Scales rendered from an SVG drawing and answered as a position on it.
GRAPHICAL_SCALES = (VisualAnalogue, NasaTlxSubscale, ContinuousQuality, CustomSvg)


@dataclass(frozen=True)
class ItemSpec:
    item_id: str
    question: str
    scale: ScaleSpec
    required: bool = True


@dataclass(frozen=True)
class ItemsScreen:
    screen_id: str
    items: tuple[ItemSpec, ...]
    KIND = "items"


@dataclass(frozen=True)
class WaitScreen:
    screen_id: str
    duration_ms: int
    KIND = "wait"


@dataclass(frozen=True)
class MediaScreen:
    screen_id: str
    asset_id: str
    autoplay: bool = True
    preload: bool = True
    KIND = "media"


@dataclass(frozen=True)
class ExportScreen:
    screen_id: str
    target: str = "upload-then-download-fallback"
    KIND = "export"


@dataclass(frozen=True)
class RemoteCommandScreen:
    screen_id: str
    command: str
    KIND = "remote_command"


ScreenSpec = ItemsScreen | WaitScreen | MediaScreen | ExportScreen | RemoteCommandScreen


@dataclass(frozen=True)
class Condition:
    item_id: str
    comparator: str
    literal: str | int | float | None = None


@dataclass(frozen=True)
class RoutingRule:
    after_screen: str
    condition: Condition
    goto_screen: str
    priority: int


@dataclass(frozen=True)
class AssetRef:
    asset_id: str
    media_type: str
    uri: str
    preload: bool = False


@dataclass(frozen=True)
class QuestionnaireSpec:
    spec_id: str
    version: str
    title: str
    screens: tuple[ScreenSpec, ...]
    routing: tuple[RoutingRule, ...] = ()
    assets: tuple[AssetRef, ...] = ()

    def screen_ids(self) -> list[str]:
        return [s.screen_id for s in self.screens]

    def screen_index(self, screen_id: str) -> int:
        for i, s in enumerate(self.screens):
            if s.screen_id == screen_id:
                return i
        raise KeyError(screen_id)

    def items(self) -> list[ItemSpec]:
        out: list[ItemSpec] = []
        for s in self.screens:
            if isinstance(s, ItemsScreen):
                out.extend(s.items)
        return out

    def item(self, item_id: str) -> ItemSpec | None:
        for it in self.items():
            if it.item_id == item_id:
                return it
        return None

    def screen_of_item(self, item_id: str) -> ItemsScreen | None:
        for s in self.screens:
            if isinstance(s, ItemsScreen) and any(it.item_id == item_id for it in s.items):
                return s
        return None

    def asset(self, asset_id: str) -> AssetRef | None:
        for a in self.assets:
            if a.asset_id == asset_id:
                return a
        return None


@dataclass
class ParseResult:
    spec: QuestionnaireSpec | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.spec is not None and not dg.errors(self.diagnostics)


# ---------------------------------------------------------------------------
# Building typed specs out of positioned JSON nodes
# ---------------------------------------------------------------------------

_SCREEN_PAYLOAD_FIELDS = {
    "items": {"items"},
    "wait": {"duration_ms"},
    "media": {"asset_id", "autoplay", "preload"},
    "export": {"target"},
    "remote_command": {"command"},
}
_ALL_PAYLOAD_FIELDS = set().union(*_SCREEN_PAYLOAD_FIELDS.values())

_TYPE_NAMES = {
    str: "string", bool: "boolean", int: "integer", float: "number",
    dict: "object", list: "array",
}

_REQUIRED = object()


class _Builder:
    """Walks a Node tree, accumulating diagnostics instead of raising.

    Also records the source position of every path it visits so that
    post-hoc semantic diagnostics can be mapped back to lines.
    """

    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []
        self.positions: dict[str, tuple[int, int]] = {}

    def diag(self, code: str, message: str, path: str, node: Node | None = None,
             severity: Severity = Severity.ERROR) -> None:
        line = node.line if node else None
        col = node.column if node else None
        self.diags.append(Diagnostic(code, message, severity, path, line, col))

    def _field(self, obj: Node, name: str, types, path: str, default=_REQUIRED):
        assert isinstance(obj.value, dict)
        node = obj.value.get(name)
        fpath = f"{path}.{name}" if path else name
        if node is None:
            if default is _REQUIRED:
                self.diag(dg.MISSING_FIELD, f"missing required field '{name}'", fpath, obj)
                return None
            return default
        self.positions[fpath] = (node.line, node.column)
        value = node.value
        if isinstance(types, tuple) and float in types and isinstance(value, int) \
                and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, types) or (isinstance(value, bool) and bool not in
                                            (types if isinstance(types, tuple) else (types,))):
            want = types if isinstance(types, tuple) else (types,)
            names = "/".join(_TYPE_NAMES.get(t, t.__name__) for t in want)
            self.diag(dg.WRONG_TYPE, f"field '{name}' must be {names}", fpath, node)
            return None
        return value

    def _require_object(self, node: Node, path: str) -> bool:
        if not isinstance(node.value, dict):
            self.diag(dg.WRONG_TYPE, "expected an object", path, node)
            return False
        self.positions.setdefault(path, (node.line, node.column))
        return True

    def _warn_unknown(self, node: Node, known: set[str], path: str) -> None:
        assert isinstance(node.value, dict)
        for key, child in node.value.items():
            if key not in known:
                self.diag(dg.UNKNOWN_FIELD, f"unknown field '{key}'",
                          f"{path}.{key}" if path else key, child, Severity.WARNING)

    def spec(self, root: Node) -> QuestionnaireSpec | None:
        if not self._require_object(root, ""):
            return None
        spec_id = self._field(root, "spec_id", str, "")
        version = self._field(root, "version", str, "")
        title = self._field(root, "title", str, "")
        screens_node = root.value.get("screens")  # type: ignore[union-attr]
        screens: list[ScreenSpec] = []
        if screens_node is None:
            self.diag(dg.MISSING_FIELD, "missing required field 'screens'", "screens", root)
        elif not isinstance(screens_node.value, list):
            self.diag(dg.WRONG_TYPE, "field 'screens' must be array", "screens", screens_node)
        else:
            self.positions["screens"] = (screens_node.line, screens_node.column)
            for i, child in enumerate(screens_node.value):
                screen = self.screen(child, f"screens[{i}]")
                if screen is not None:
                    screens.append(screen)
            if not screens_node.value:
                self.diag(dg.BAD_VALUE, "a questionnaire needs at least one screen",
                          "screens", screens_node)
        routing = self._array_of(root, "routing", self.rule)
        assets = self._array_of(root, "assets", self.asset)
        self._warn_unknown(root, {"spec_id", "version", "title", "screens",
                                  "routing", "assets"}, "")
        if dg.errors(self.diags) or spec_id is None or version is None or title is None:
            return None
        return QuestionnaireSpec(spec_id, version, title, tuple(screens),
                                 tuple(routing), tuple(assets))

    def _array_of(self, root: Node, name: str, build) -> list:
        node = root.value.get(name)  # type: ignore[union-attr]
        if node is None:
            return []
        if not isinstance(node.value, list):
            self.diag(dg.WRONG_TYPE, f"field '{name}' must be array", name, node)
            return []
        self.positions[name] = (node.line, node.column)
        out = []
        for i, child in enumerate(node.value):
            built = build(child, f"{name}[{i}]")
            if built is not None:
                out.append(built)
        return out

    def screen(self, node: Node, path: str) -> ScreenSpec | None:
        if not self._require_object(node, path):
            return None
        screen_id = self._field(node, "screen_id", str, path)
        kind = self._field(node, "kind", str, path)
        if kind is None or screen_id is None:
            return None
        if kind not in _SCREEN_PAYLOAD_FIELDS:
            self.diag(dg.UNKNOWN_SCREEN_KIND, f"unknown screen kind '{kind}'",
                      f"{path}.kind", node)
            return None
        # Exactly one payload variant may be present, and it must match kind.
        for key in node.value:  # type: ignore[union-attr]
            if key in _ALL_PAYLOAD_FIELDS and key not in _SCREEN_PAYLOAD_FIELDS[kind]:
                self.diag(dg.MIXED_PAYLOAD,
                          f"field '{key}' does not belong to a '{kind}' screen",
                          f"{path}.{key}", node.value[key])  # type: ignore[index]
        self._warn_unknown(node, {"screen_id", "kind"} | _ALL_PAYLOAD_FIELDS, path)
        if kind == "items":
            items_node = node.value.get("items")  # type: ignore[union-attr]
            if items_node is None:
                self.diag(dg.MISSING_FIELD, "missing required field 'items'",
                          f"{path}.items", node)
                return None
            if not isinstance(items_node.value, list):
                self.diag(dg.WRONG_TYPE, "field 'items' must be array",
                          f"{path}.items", items_node)
                return None
            self.positions[f"{path}.items"] = (items_node.line, items_node.column)
            items = []
            for i, child in enumerate(items_node.value):
                item = self.item(child, f"{path}.items[{i}]")
                if item is not None:
                    items.append(item)
            return ItemsScreen(screen_id, tuple(items))
        if kind == "wait":
            duration = self._field(node, "duration_ms", int, path)
            if duration is None:
                return None
            return WaitScreen(screen_id, duration)
        if kind == "media":
            asset_id = self._field(node, "asset_id", str, path)
            autoplay = self._field(node, "autoplay", bool, path, True)
            preload = self._field(node, "preload", bool, path, True)
            if asset_id is None or autoplay is None or preload is None:
                return None
            return MediaScreen(screen_id, asset_id, autoplay, preload)
        if kind == "export":
            target = self._field(node, "target", str, path, "upload-then-download-fallback")
            if target is None:
                return None
            if target not in EXPORT_TARGETS:
                self.diag(dg.BAD_VALUE,
                          f"export target must be one of {', '.join(EXPORT_TARGETS)}",
                          f"{path}.target", node)
                return None
            return ExportScreen(screen_id, target)
        command = self._field(node, "command", str, path)
        if command is None:
            return None
        return RemoteCommandScreen(screen_id, command)

    def item(self, node: Node, path: str) -> ItemSpec | None:
        if not self._require_object(node, path):
            return None
        item_id = self._field(node, "item_id", str, path)
        question = self._field(node, "question", str, path)
        required = self._field(node, "required", bool, path, True)
        scale_node = node.value.get("scale")  # type: ignore[union-attr]
        self._warn_unknown(node, {"item_id", "question", "required", "scale"}, path)
        if scale_node is None:
            self.diag(dg.MISSING_FIELD, "missing required field 'scale'",
                      f"{path}.scale", node)
            return None
        scale = self.scale(scale_node, f"{path}.scale")
        if None in (item_id, question, required, scale):
            return None
        return ItemSpec(item_id, question, scale, required)

    def scale(self, node: Node, path: str) -> ScaleSpec | None:
        if not self._require_object(node, path):
            return None
        variant = self._field(node, "variant", str, path)
        if variant is None:
            return None
        if variant == "category_rating":
            labels_node = node.value.get("labels")  # type: ignore[union-attr]
            if labels_node is None or not isinstance(labels_node.value, list):
                self.diag(dg.MISSING_FIELD if labels_node is None else dg.WRONG_TYPE,
                          "category_rating needs an array field 'labels'",
                          f"{path}.labels", labels_node or node)
                return None
            self.positions[f"{path}.labels"] = (labels_node.line, labels_node.column)
            labels = []
            for i, child in enumerate(labels_node.value):
                if not isinstance(child.value, str):
                    self.diag(dg.WRONG_TYPE, "labels must be strings",
                              f"{path}.labels[{i}]", child)
                    return None
                labels.append(child.value)
            return CategoryRating(tuple(labels))
        if variant == "visual_analogue":
            min_label = self._field(node, "min_label", str, path, "")
            max_label = self._field(node, "max_label", str, path, "")
            if min_label is None or max_label is None:
                return None
            return VisualAnalogue(min_label, max_label)
        if variant == "nasa_tlx":
            dimension = self._field(node, "dimension", str, path)
            return None if dimension is None else NasaTlxSubscale(dimension)
        if variant == "continuous_quality":
            return ContinuousQuality()
        if variant == "free_text":
            max_length = self._field(node, "max_length", int, path, 1000)
            return None if max_length is None else FreeText(max_length)
        if variant == "free_hand":
            width = self._field(node, "width_px", int, path)
            height = self._field(node, "height_px", int, path)
            if width is None or height is None:
                return None
            return FreeHand(width, height)
        if variant == "custom_svg":
            svg_asset_id = self._field(node, "svg_asset_id", str, path)
            value_min = self._field(node, "value_min", (int, float), path)
            value_max = self._field(node, "value_max", (int, float), path)
            if svg_asset_id is None or value_min is None or value_max is None:
                return None
            return CustomSvg(svg_asset_id, float(value_min), float(value_max))
        self.diag(dg.UNKNOWN_SCALE_VARIANT, f"unknown scale variant '{variant}'",
                  f"{path}.variant", node)
        return None

    def rule(self, node: Node, path: str) -> RoutingRule | None:
        if not self._require_object(node, path):
            return None
        after = self._field(node, "after_screen", str, path)
        goto = self._field(node, "goto_screen", str, path)
        priority = self._field(node, "priority", int, path)
        cond_node = node.value.get("condition")  # type: ignore[union-attr]
        self._warn_unknown(node, {"after_screen", "goto_screen", "priority",
                                  "condition"}, path)
        if cond_node is None:
            self.diag(dg.MISSING_FIELD, "missing required field 'condition'",
                      f"{path}.condition", node)
            return None
        cond = self.condition(cond_node, f"{path}.condition")
        if None in (after, goto, priority, cond):
            return None
        return RoutingRule(after, cond, goto, priority)

    def condition(self, node: Node, path: str) -> Condition | None:
        if not self._require_object(node, path):
            return None
        item_id = self._field(node, "item_id", str, path)
        comparator = self._field(node, "comparator", str, path)
        literal = self._field(node, "literal", (str, int, float, type(None)), path, None)
        self._warn_unknown(node, {"item_id", "comparator", "literal"}, path)
        if item_id is None or comparator is None:
            return None
        if comparator not in COMPARATORS:
            self.diag(dg.UNKNOWN_COMPARATOR, f"unknown comparator '{comparator}'",
                      f"{path}.comparator", node)
            return None
        return Condition(item_id, comparator, literal)

    def asset(self, node: Node, path: str) -> AssetRef | None:
        if not self._require_object(node, path):
            return None
        asset_id = self._field(node, "asset_id", str, path)
        media_type = self._field(node, "media_type", str, path)
        uri = self._field(node, "uri", str, path)
        preload = self._field(node, "preload", bool, path, False)
        self._warn_unknown(node, {"asset_id", "media_type", "uri", "preload"}, path)
        if None in (asset_id, media_type, uri, preload):
            return None
        return AssetRef(asset_id, media_type, uri, preload)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(spec: QuestionnaireSpec) -> list[Diagnostic]:
    """Check every structural invariant; an empty error list means valid.

    Warnings (severity WARNING) do not make a spec invalid.
    """
    diags: list[Diagnostic] = []

    def err(code: str, message: str, path: str) -> None:
        diags.append(Diagnostic(code, message, Severity.ERROR, path))

    seen_screens: dict[str, int] = {}
    seen_items: dict[str, str] = {}
    asset_ids = {a.asset_id for a in spec.assets}
    for i, a in enumerate(spec.assets):
        if [x.asset_id for x in spec.assets].index(a.asset_id) != i:
            err(dg.DUPLICATE_ID, f"duplicate asset id '{a.asset_id}'", f"assets[{i}].asset_id")

    for i, screen in enumerate(spec.screens):
        path = f"screens[{i}]"
        if screen.screen_id in seen_screens:
            err(dg.DUPLICATE_ID, f"duplicate screen id '{screen.screen_id}'",
                f"{path}.screen_id")
        seen_screens.setdefault(screen.screen_id, i)
        if isinstance(screen, ItemsScreen):
            if not screen.items:
                err(dg.EMPTY_ITEMS, "items screen has no items", f"{path}.items")
            local: set[str] = set()
            for j, item in enumerate(screen.items):
                ipath = f"{path}.items[{j}]"
                if item.item_id in local:
                    err(dg.DUPLICATE_ID,
                        f"duplicate item id '{item.item_id}' on screen "
                        f"'{screen.screen_id}'", f"{ipath}.item_id")
                elif item.item_id in seen_items:
                    # Item ids must be unique across the whole questionnaire:
                    # answers are keyed by item id alone.
                    err(dg.DUPLICATE_ID,
                        f"item id '{item.item_id}' already used on screen "
                        f"'{seen_items[item.item_id]}'", f"{ipath}.item_id")
                local.add(item.item_id)
                seen_items.setdefault(item.item_id, screen.screen_id)
                if not item.question:
                    err(dg.EMPTY_QUESTION, "question must be non-empty",
                        f"{ipath}.question")
                diags.extend(_validate_scale(item.scale, f"{ipath}.scale", asset_ids))
        elif isinstance(screen, WaitScreen):
            if screen.duration_ms < 0:
                err(dg.BAD_VALUE, "wait duration must be >= 0", f"{path}.duration_ms")
        elif isinstance(screen, MediaScreen):
            if screen.asset_id not in asset_ids:
                err(dg.DANGLING_ASSET_REF,
                    f"media screen references undeclared asset '{screen.asset_id}'",
                    f"{path}.asset_id")

    by_screen: dict[str, set[int]] = {}
    for i, rule in enumerate(spec.routing):
        path = f"routing[{i}]"
        if rule.after_screen not in seen_screens:
            err(dg.DANGLING_SCREEN_REF,
                f"routing rule refers to unknown screen '{rule.after_screen}'",
                f"{path}.after_screen")
        if rule.goto_screen not in seen_screens:
            err(dg.DANGLING_SCREEN_REF,
                f"routing rule refers to unknown screen '{rule.goto_screen}'",
                f"{path}.goto_screen")
        if rule.condition.item_id not in seen_items:
            err(dg.DANGLING_ITEM_REF,
                f"routing condition refers to unknown item '{rule.condition.item_id}'",
                f"{path}.condition.item_id")
        if rule.condition.comparator in ("answered", "unanswered"):
            if rule.condition.literal is not None:
                err(dg.BAD_VALUE,
                    f"comparator '{rule.condition.comparator}' takes no literal",
                    f"{path}.condition.literal")
        elif rule.condition.literal is None:
            err(dg.BAD_VALUE,
                f"comparator '{rule.condition.comparator}' needs a literal",
                f"{path}.condition.literal")
        priorities = by_screen.setdefault(rule.after_screen, set())
        if rule.priority in priorities:
            err(dg.DUPLICATE_PRIORITY,
                f"two rules for screen '{rule.after_screen}' share priority "
                f"{rule.priority}", f"{path}.priority")
        priorities.add(rule.priority)

    if not any(isinstance(s, ExportScreen) for s in spec.screens):
        diags.append(Diagnostic(
            dg.NO_EXPORT_SCREEN,
            "no export screen: collected data will only live in memory",
            Severity.WARNING, "screens"))
    return diags


def _validate_scale(scale: ScaleSpec, path: str, asset_ids: set[str]) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def err(code: str, message: str, sub: str = "") -> None:
        diags.append(Diagnostic(code, message, Severity.ERROR, path + sub))

    if isinstance(scale, CategoryRating):
        if len(scale.labels) < 2:
            err(dg.BAD_VALUE, "category_rating needs at least two labels", ".labels")
        if len(set(scale.labels)) != len(scale.labels):
            err(dg.DUPLICATE_LABEL, "category_rating labels must be unique", ".labels")
    elif isinstance(scale, FreeText):
        if scale.max_length <= 0:
            err(dg.BAD_VALUE, "free_text max_length must be positive", ".max_length")
    elif isinstance(scale, FreeHand):
        if scale.width_px <= 0 or scale.height_px <= 0:
            err(dg.BAD_VALUE, "free_hand canvas dimensions must be positive")
    elif isinstance(scale, CustomSvg):
        if not scale.value_min < scale.value_max:
            err(dg.BAD_VALUE, "custom_svg needs value_min < value_max")
        if scale.svg_asset_id not in asset_ids:
            err(dg.DANGLING_ASSET_REF,
                f"custom_svg references undeclared asset '{scale.svg_asset_id}'",
                ".svg_asset_id")
    return diags


# ---------------------------------------------------------------------------
# Parse / serialize
# ---------------------------------------------------------------------------

def parse_spec(document: bytes | str) -> ParseResult:
    """Parse and fully validate a questionnaire document.

    On success result.spec satisfies every invariant checked by validate().
    On failure result.spec is None and result.diagnostics explains why,
    with line/column positions wherever the source location is known.
    """
    try:
        root = parse_document(document)
    except JsonSyntaxError as exc:
        return ParseResult(None, [Diagnostic(dg.SYNTAX_ERROR, exc.reason,
                                             Severity.ERROR, "", exc.line, exc.column)])
    builder = _Builder()
    spec = builder.spec(root)
    diags = builder.diags
    if spec is not None:
        semantic = validate(spec)
        for d in semantic:
            pos = _position_for(builder.positions, d.path)
            if pos and d.line is None:
                d = Diagnostic(d.code, d.message, d.severity, d.path, pos[0], pos[1])
            diags.append(d)
        if dg.errors(semantic):
            spec = None
    return ParseResult(spec, diags)


def _position_for(positions: dict[str, tuple[int, int]], path: str):
    while path:
        if path in positions:
            return positions[path]
        cut = max(path.rfind("."), path.rfind("["))
        if cut <= 0:
            return None
        path = path[:cut]
    return None


def scale_to_doc(scale: ScaleSpec) -> dict:
    doc: dict = {"variant": scale.VARIANT}
    if isinstance(scale, CategoryRating):
        doc["labels"] = list(scale.labels)
    elif isinstance(scale, VisualAnalogue):
        doc["min_label"] = scale.min_label
        doc["max_label"] = scale.max_label
    elif isinstance(scale, NasaTlxSubscale):
        doc["dimension"] = scale.dimension
    elif isinstance(scale, FreeText):
        doc["max_length"] = scale.max_length
    elif isinstance(scale, FreeHand):
        doc["width_px"] = scale.width_px
        doc["height_px"] = scale.height_px
    elif isinstance(scale, CustomSvg):
        doc["svg_asset_id"] = scale.svg_asset_id
        doc["value_min"] = scale.value_min
        doc["value_max"] = scale.value_max
    return doc


def spec_to_doc(spec: QuestionnaireSpec) -> dict:
    """Plain-dict form of a spec, in canonical field order."""
    screens = []
    for screen in spec.screens:
        doc: dict = {"screen_id": screen.screen_id, "kind": screen.KIND}
        if isinstance(screen, ItemsScreen):
            doc["items"] = [
                {"item_id": it.item_id, "question": it.question,
                 "required": it.required, "scale": scale_to_doc(it.scale)}
                for it in screen.items
            ]
        elif isinstance(screen, WaitScreen):
            doc["duration_ms"] = screen.duration_ms
        elif isinstance(screen, MediaScreen):
            doc["asset_id"] = screen.asset_id
            doc["autoplay"] = screen.autoplay
            doc["preload"] = screen.preload
        elif isinstance(screen, ExportScreen):
            doc["target"] = screen.target
        else:
            doc["command"] = screen.command
        screens.append(doc)
    return {
        "spec_id": spec.spec_id,
        "version": spec.version,
        "title": spec.title,
        "screens": screens,
        "routing": [
            {"after_screen": r.after_screen,
             "condition": {"item_id": r.condition.item_id,
                           "comparator": r.condition.comparator,
                           "literal": r.condition.literal},
             "goto_screen": r.goto_screen,
             "priority": r.priority}
            for r in spec.routing
        ],
        "assets": [
            {"asset_id": a.asset_id, "media_type": a.media_type,
             "uri": a.uri, "preload": a.preload}
            for a in spec.assets
        ],
    }


def serialize_spec(spec: QuestionnaireSpec) -> bytes:
    """The canonical serialization: stable key order, 2-space indent, LF."""
    text = json.dumps(spec_to_doc(spec), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def spec_digest(spec: QuestionnaireSpec) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(serialize_spec(spec)).hexdigest()
