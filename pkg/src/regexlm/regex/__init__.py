"""Regex dialect: parsing, Thompson NFAs, and minimized byte-level DFAs."""

from __future__ import annotations

from .dfa import (
    DEFAULT_STATE_CAP,
    Dfa,
    determinize,
    dfa_matches,
    dfa_to_dot,
    dfa_to_text,
    minimize,
)
from .nfa import Nfa, compile_nfa, expand_repeats, nfa_to_dot
from .nodes import (
    ANY_BYTE,
    Alternation,
    ByteClass,
    Concat,
    Empty,
    Literal,
    Node,
    Optional,
    Plus,
    Repeat,
    Star,
    complement_ranges,
    normalize_ranges,
)
from .parser import DEFAULT_MAX_REPEAT, RegexSyntaxError, escape, parse_regex


def compile_regex(
    pattern: str,
    *,
    max_repeat: int = DEFAULT_MAX_REPEAT,
    max_states: int = DEFAULT_STATE_CAP,
) -> Dfa:
    """Parse, determinize, and minimize a pattern in one step."""
    ast = parse_regex(pattern, max_repeat=max_repeat)
    return minimize(determinize(compile_nfa(ast), max_states=max_states))


__all__ = [
    "ANY_BYTE",
    "Alternation",
    "ByteClass",
    "Concat",
    "DEFAULT_MAX_REPEAT",
    "DEFAULT_STATE_CAP",
    "Dfa",
    "Empty",
    "Literal",
    "Nfa",
    "Node",
    "Optional",
    "Plus",
    "Repeat",
    "RegexSyntaxError",
    "Star",
    "compile_nfa",
    "compile_regex",
    "complement_ranges",
    "determinize",
    "dfa_matches",
    "dfa_to_dot",
    "dfa_to_text",
    "escape",
    "expand_repeats",
    "minimize",
    "nfa_to_dot",
    "normalize_ranges",
    "parse_regex",
]
