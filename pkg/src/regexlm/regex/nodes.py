"""AST node types for the byte-level regex dialect.

The alphabet is bytes 0..255. Multi-byte (non-ASCII) literals are represented
by the parser as a Concat of single-byte Literals, so every node here speaks
bytes only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

ByteRange = tuple[int, int]  # inclusive (lo, hi)


def normalize_ranges(ranges) -> tuple[ByteRange, ...]:
    """Sort and merge byte ranges; reject empty or out-of-domain sets."""
    items = sorted((int(lo), int(hi)) for lo, hi in ranges)
    if not items:
        raise ValueError("byte class must contain at least one range")
    merged: list[list[int]] = []
    for lo, hi in items:
        if not 0 <= lo <= hi <= 255:
            raise ValueError(f"byte range ({lo}, {hi}) invalid for alphabet 0..255")
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


def complement_ranges(ranges: tuple[ByteRange, ...]) -> tuple[ByteRange, ...]:
    """Complement a normalized range set within 0..255.

    Raises ValueError if the complement is empty (full-alphabet input).
    """
    out: list[ByteRange] = []
    next_free = 0
    for lo, hi in ranges:
        if lo > next_free:
            out.append((next_free, lo - 1))
        next_free = hi + 1
    if next_free <= 255:
        out.append((next_free, 255))
    if not out:
        raise ValueError("byte class must contain at least one range")
    return tuple(out)


@dataclass(frozen=True)
class Literal:
    byte: int

    def __post_init__(self) -> None:
        if not 0 <= self.byte <= 255:
            raise ValueError(f"literal byte {self.byte} outside 0..255")


@dataclass(frozen=True)
class ByteClass:
    """A set of byte ranges, kept sorted and non-overlapping."""

    ranges: tuple[ByteRange, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranges", normalize_ranges(self.ranges))

    def contains(self, byte: int) -> bool:
        return any(lo <= byte <= hi for lo, hi in self.ranges)


@dataclass(frozen=True)
class Concat:
    parts: tuple["Node", ...]


@dataclass(frozen=True)
class Alternation:
    options: tuple["Node", ...]


@dataclass(frozen=True)
class Star:
    child: "Node"


@dataclass(frozen=True)
class Plus:
    child: "Node"


@dataclass(frozen=True)
class Optional:
    child: "Node"


@dataclass(frozen=True)
class Repeat:
    """Bounded repetition; max=None means unbounded ({m,})."""

    child: "Node"
    min: int
    max: int | None

    def __post_init__(self) -> None:
        if self.min < 0:
            raise ValueError("repeat minimum must be >= 0")
        if self.max is not None and self.max < self.min:
            raise ValueError("repeat maximum must be >= minimum")


@dataclass(frozen=True)
class Empty:
    """Matches exactly the empty string."""


Node = Union[
    Literal, ByteClass, Concat, Alternation, Star, Plus, Optional, Repeat, Empty
]

ANY_BYTE = ByteClass(((0, 255),))
