"""Diagnostic records shared by the parsers and validators."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

# Machine-readable diagnostic codes. Anything user input can get wrong maps
# to exactly one of these.
SYNTAX_ERROR = "SYNTAX_ERROR"
MISSING_FIELD = "MISSING_FIELD"
WRONG_TYPE = "WRONG_TYPE"
UNKNOWN_FIELD = "UNKNOWN_FIELD"
MIXED_PAYLOAD = "MIXED_PAYLOAD"
UNKNOWN_SCREEN_KIND = "UNKNOWN_SCREEN_KIND"
UNKNOWN_SCALE_VARIANT = "UNKNOWN_SCALE_VARIANT"
UNKNOWN_COMPARATOR = "UNKNOWN_COMPARATOR"
DUPLICATE_ID = "DUPLICATE_ID"
DUPLICATE_LABEL = "DUPLICATE_LABEL"
DUPLICATE_PRIORITY = "DUPLICATE_PRIORITY"
DANGLING_SCREEN_REF = "DANGLING_SCREEN_REF"
DANGLING_ITEM_REF = "DANGLING_ITEM_REF"
DANGLING_ASSET_REF = "DANGLING_ASSET_REF"
EMPTY_ITEMS = "EMPTY_ITEMS"
EMPTY_QUESTION = "EMPTY_QUESTION"
BAD_VALUE = "BAD_VALUE"
NO_EXPORT_SCREEN = "NO_EXPORT_SCREEN"
UNPRINTABLE_SCALE = "UNPRINTABLE_SCALE"
ASSET_NOT_AVAILABLE = "ASSET_NOT_AVAILABLE"
OVERLAPPING_GROUPS = "OVERLAPPING_GROUPS"
UNBOUND_PLACEHOLDER = "UNBOUND_PLACEHOLDER"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: Severity = Severity.ERROR
    path: str = ""
    line: int | None = None
    column: int | None = None

    def format(self) -> str:
        loc = ""
        if self.line is not None:
            loc = f"{self.line}:{self.column or 0}: "
        elif self.path:
            loc = f"{self.path}: "
        return f"{loc}{self.severity.value}: {self.code}: {self.message}"

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "severity": self.severity.value,
            "path": self.path,
            "line": self.line,
            "column": self.column,
        }


def errors(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity is Severity.ERROR]


def warnings(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity is Severity.WARNING]
