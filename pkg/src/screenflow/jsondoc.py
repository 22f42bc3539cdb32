"""Position-aware reader for JSON documents.

The stdlib json module parses the same grammar but discards source
positions, which the questionnaire tooling needs to point diagnostics at
the offending line. This reader accepts standard JSON (RFC 8259) and
returns a tree of nodes annotated with the (line, column) where each value
starts. The test suite cross-checks extracted values against json.loads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_NUMBER_RE = re.compile(r"-?(?:0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?")
_ESCAPES = {
    '"': '"',
    "\\": "\\",
    "/": "/",
    "b": "\b",
    "f": "\f",
    "n": "\n",
    "r": "\r",
    "t": "\t",
}


class JsonSyntaxError(ValueError):
    """Raised on malformed input; carries the source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


@dataclass
class Node:
    """A JSON value plus the position where its first character sits.

    For objects, value maps key -> Node; for arrays it is a list of Node.
    Scalars hold plain Python values.
    """

    value: object
    line: int
    column: int

    def plain(self) -> object:
        if isinstance(self.value, dict):
            return {k: v.plain() for k, v in self.value.items()}
        if isinstance(self.value, list):
            return [v.plain() for v in self.value]
        return self.value


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> JsonSyntaxError:
        return JsonSyntaxError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\n\r":
            self._advance()

    def peek(self) -> str:
        if self.pos >= len(self.text):
            raise self.error("unexpected end of document")
        return self.text[self.pos]

    def expect(self, ch: str) -> None:
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self._advance()

    def value(self) -> Node:
        self.skip_ws()
        line, col = self.line, self.col
        ch = self.peek()
        if ch == "{":
            return Node(self._object(), line, col)
        if ch == "[":
            return Node(self._array(), line, col)
        if ch == '"':
            return Node(self._string(), line, col)
        if ch == "-" or ch.isdigit():
            return Node(self._number(), line, col)
        for word, val in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(word, self.pos):
                self._advance(len(word))
                return Node(val, line, col)
        raise self.error(f"unexpected character {ch!r}")

    def _object(self) -> dict[str, Node]:
        self.expect("{")
        out: dict[str, Node] = {}
        self.skip_ws()
        if self.peek() == "}":
            self._advance()
            return out
        while True:
            self.skip_ws()
            if self.peek() != '"':
                raise self.error("expected string key")
            key = self._string()
            self.skip_ws()
            self.expect(":")
            out[key] = self.value()
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self._advance()
                continue
            if ch == "}":
                self._advance()
                return out
            raise self.error("expected ',' or '}'")

    def _array(self) -> list[Node]:
        self.expect("[")
        out: list[Node] = []
        self.skip_ws()
        if self.peek() == "]":
            self._advance()
            return out
        while True:
            out.append(self.value())
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self._advance()
                continue
            if ch == "]":
                self._advance()
                return out
            raise self.error("expected ',' or ']'")

    def _string(self) -> str:
        self.expect('"')
        buf: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self._advance()
                return "".join(buf)
            if ch == "\\":
                self._advance()
                esc = self.peek()
                if esc in _ESCAPES:
                    buf.append(_ESCAPES[esc])
                    self._advance()
                elif esc == "u":
                    self._advance()
                    buf.append(self._unicode_escape())
                else:
                    raise self.error(f"invalid escape \\{esc}")
            elif ord(ch) < 0x20:
                raise self.error("unescaped control character in string")
            else:
                buf.append(ch)
                self._advance()

    def _unicode_escape(self) -> str:
        code = self._hex4()
        # Combine UTF-16 surrogate pairs; a lone surrogate is kept as-is,
        # matching json.loads.
        if 0xD800 <= code <= 0xDBFF and self.text.startswith("\\u", self.pos):
            save_pos, save_line, save_col = self.pos, self.line, self.col
            self._advance(2)
            low = self._hex4()
            if 0xDC00 <= low <= 0xDFFF:
                return chr(0x10000 + ((code - 0xD800) << 10) + (low - 0xDC00))
            self.pos, self.line, self.col = save_pos, save_line, save_col
        return chr(code)

    def _hex4(self) -> int:
        if self.pos + 4 > len(self.text):
            raise self.error("truncated \\u escape")
        hex_digits = self.text[self.pos : self.pos + 4]
        try:
            code = int(hex_digits, 16)
        except ValueError:
            raise self.error(f"invalid \\u escape {hex_digits!r}") from None
        self._advance(4)
        return code

    def _number(self) -> int | float:
        m = _NUMBER_RE.match(self.text, self.pos)
        if m is None:
            raise self.error("malformed number")
        text = m.group(0)
        self._advance(len(text))
        if m.group(1) is None and m.group(2) is None:
            return int(text)
        return float(text)


def parse_document(data: bytes | str) -> Node:
    """Parse a complete JSON document, rejecting trailing content.

    Raises JsonSyntaxError with line/column on any malformed input,
    including bytes that are not valid UTF-8.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = data[: exc.start].decode("utf-8", errors="replace")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise JsonSyntaxError("document is not valid UTF-8", line, col) from None
    else:
        text = data
    reader = _Reader(text)
    node = reader.value()
    reader.skip_ws()
    if reader.pos != len(text):
        raise reader.error("trailing content after document")
    return node
