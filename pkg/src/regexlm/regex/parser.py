"""Parser for the byte-level regex dialect.

Supported syntax: literals, grouping `()`, alternation `|`, quantifiers
`*` `+` `?` `{m}` `{m,}` `{m,n}`, character classes `[...]` with ranges and
`^` negation, escapes (`\\n` `\\t` `\\r` `\\0` `\\xNN`, shorthand classes
`\\d` `\\w` `\\s` and complements, escaped punctuation), and `.` meaning any
byte. Non-ASCII literal characters decompose into their UTF-8 byte sequence.

Patterns describe complete strings: matching is anchored at both ends.
"""

from __future__ import annotations

from ..errors import EngineError
from .nodes import (
    Alternation,
    ByteClass,
    ByteRange,
    Concat,
    Empty,
    Literal,
    Node,
    Optional,
    Plus,
    Repeat,
    Star,
    complement_ranges,
)

DEFAULT_MAX_REPEAT = 256

_QUANTIFIER_STARTS = frozenset("*+?{")

_ESCAPE_BYTES = {"n": 0x0A, "t": 0x09, "r": 0x0D, "0": 0x00}

_SHORTHAND_RANGES: dict[str, tuple[ByteRange, ...]] = {
    "d": ((0x30, 0x39),),
    "w": ((0x30, 0x39), (0x41, 0x5A), (0x5F, 0x5F), (0x61, 0x7A)),
    "s": ((0x09, 0x0D), (0x20, 0x20)),
}

# Characters that escape() must protect so the output reparses literally.
_METACHARS = frozenset("\\()[]{}|*+?.^-")


class RegexSyntaxError(EngineError, ValueError):
    """Rejected pattern; `offset` is the UTF-8 byte offset of the fault."""

    def __init__(self, offset: int, reason: str) -> None:
        super().__init__(f"syntax error at byte offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


def escape(text: str) -> str:
    """Escape text so it parses as a literal match for itself."""
    return "".join("\\" + ch if ch in _METACHARS else ch for ch in text)


def parse_regex(pattern: str, *, max_repeat: int = DEFAULT_MAX_REPEAT) -> Node:
    """Parse a pattern into an AST.

    max_repeat caps `{m,n}` bounds (the bounds expand structurally during NFA
    construction, so the cap bounds that blowup).

    Raises RegexSyntaxError with a byte offset and reason on malformed input.
    """
    return _Parser(pattern, max_repeat).parse()


class _Parser:
    def __init__(self, pattern: str, max_repeat: int) -> None:
        self.chars = list(pattern)
        # Byte offset of each character, for error reporting.
        offsets = []
        pos = 0
        for ch in self.chars:
            offsets.append(pos)
            pos += len(ch.encode("utf-8"))
        offsets.append(pos)
        self.offsets = offsets
        self.pos = 0
        self.max_repeat = max_repeat

    def parse(self) -> Node:
        node = self._alternation()
        if self.pos < len(self.chars):
            if self.chars[self.pos] == ")":
                self._fail("unmatched closing parenthesis")
            self._fail(f"unexpected character {self.chars[self.pos]!r}")
        return node

    # -- scanning helpers ---------------------------------------------------

    def _peek(self) -> str | None:
        return self.chars[self.pos] if self.pos < len(self.chars) else None

    def _advance(self) -> str:
        ch = self.chars[self.pos]
        self.pos += 1
        return ch

    def _offset(self, pos: int | None = None) -> int:
        return self.offsets[self.pos if pos is None else pos]

    def _fail(self, reason: str, pos: int | None = None) -> None:
        raise RegexSyntaxError(self._offset(pos), reason)

    # -- grammar ------------------------------------------------------------

    def _alternation(self) -> Node:
        options = [self._concat()]
        while self._peek() == "|":
            self._advance()
            options.append(self._concat())
        return options[0] if len(options) == 1 else Alternation(tuple(options))

    def _concat(self) -> Node:
        parts: list[Node] = []
        while self._peek() not in (None, "|", ")"):
            parts.append(self._factor())
        if not parts:
            return Empty()
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def _factor(self) -> Node:
        node = self._atom()
        while self._peek() in _QUANTIFIER_STARTS:
            ch = self._advance()
            if ch == "*":
                node = Star(node)
            elif ch == "+":
                node = Plus(node)
            elif ch == "?":
                node = Optional(node)
            else:
                node = self._repeat(node)
        return node

    def _repeat(self, child: Node) -> Node:
        # `{` already consumed; its offset is one char back.
        open_pos = self.pos - 1
        lo = self._bound(open_pos)
        hi: int | None
        if self._peek() == ",":
            self._advance()
            hi = self._bound(open_pos) if self._peek() != "}" else None
        else:
            hi = lo
        if self._peek() != "}":
            self._fail("bad repeat bounds: missing '}'", open_pos)
        self._advance()
        if hi is not None and hi < lo:
            self._fail("bad repeat bounds: minimum exceeds maximum", open_pos)
        if max(lo, hi if hi is not None else lo) > self.max_repeat:
            self._fail(
                f"bad repeat bounds: exceeds expansion cap of {self.max_repeat}",
                open_pos,
            )
        return Repeat(child, lo, hi)

    def _bound(self, open_pos: int) -> int:
        digits = ""
        while (ch := self._peek()) is not None and ch.isdigit():
            digits += self._advance()
        if not digits:
            self._fail("bad repeat bounds: expected integer", open_pos)
        return int(digits)

    def _atom(self) -> Node:
        ch = self._peek()
        if ch is None:
            self._fail("unexpected end of pattern")
        if ch == "(":
            open_pos = self.pos
            self._advance()
            node = self._alternation()
            if self._peek() != ")":
                self._fail("unbalanced parenthesis", open_pos)
            self._advance()
            return node
        if ch == "[":
            return self._byte_class()
        if ch == ".":
            self._advance()
            return ByteClass(((0, 255),))
        if ch == "\\":
            return self._escape_atom()
        if ch in _QUANTIFIER_STARTS:
            self._fail(f"quantifier {ch!r} with nothing to repeat")
        self._advance()
        return _literal_for(ch)

    def _escape_atom(self) -> Node:
        backslash_pos = self.pos
        self._advance()
        ch = self._peek()
        if ch is None:
            self._fail("trailing backslash", backslash_pos)
        if ch in ("d", "w", "s"):
            self._advance()
            return ByteClass(_SHORTHAND_RANGES[ch])
        if ch in ("D", "W", "S"):
            self._advance()
            return ByteClass(complement_ranges(_SHORTHAND_RANGES[ch.lower()]))
        return Literal(self._escape_byte(backslash_pos))

    def _escape_byte(self, backslash_pos: int) -> int:
        """Single-byte escape body (backslash already consumed)."""
        ch = self._advance()
        if ch in _ESCAPE_BYTES:
            return _ESCAPE_BYTES[ch]
        if ch == "x":
            digits = ""
            for _ in range(2):
                nxt = self._peek()
                if nxt is None or nxt not in "0123456789abcdefABCDEF":
                    self._fail("bad \\x escape: expected two hex digits", backslash_pos)
                digits += self._advance()
            return int(digits, 16)
        if ch.isalnum() or not ch.isascii():
            self._fail(f"unknown escape \\{ch}", backslash_pos)
        return ord(ch)

    def _byte_class(self) -> Node:
        open_pos = self.pos
        self._advance()
        negated = False
        if self._peek() == "^":
            negated = True
            self._advance()
        ranges: list[ByteRange] = []
        while True:
            ch = self._peek()
            if ch is None:
                self._fail("unterminated character class", open_pos)
            if ch == "]":
                self._advance()
                break
            lo = self._class_member()
            if self._peek() == "-" and self.pos + 1 < len(self.chars) and self.chars[
                self.pos + 1
            ] != "]":
                dash_pos = self.pos
                self._advance()
                hi = self._class_member()
                if hi < lo:
                    self._fail("bad character range", dash_pos)
                ranges.append((lo, hi))
            else:
                ranges.append((lo, lo))
        if not ranges:
            self._fail("empty class", open_pos)
        normalized = ByteClass(tuple(ranges)).ranges
        if negated:
            try:
                normalized = complement_ranges(normalized)
            except ValueError:
                self._fail("empty class", open_pos)
        return ByteClass(normalized)

    def _class_member(self) -> int:
        ch = self._peek()
        if ch == "\\":
            backslash_pos = self.pos
            self._advance()
            if self._peek() is None:
                self._fail("trailing backslash", backslash_pos)
            if self._peek() in "dwsDWS":
                self._fail(
                    "shorthand classes are not allowed inside [...]; "
                    "use explicit ranges",
                    backslash_pos,
                )
            return self._escape_byte(backslash_pos)
        if not ch.isascii():
            self._fail("non-ASCII character in class; use \\xNN escapes")
        self._advance()
        return ord(ch)


def _literal_for(ch: str) -> Node:
    encoded = ch.encode("utf-8")
    if len(encoded) == 1:
        return Literal(encoded[0])
    return Concat(tuple(Literal(b) for b in encoded))
