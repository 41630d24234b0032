"""Thompson construction: AST -> nondeterministic finite automaton."""

from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import (
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
)


@dataclass
class Nfa:
    """Byte-labeled NFA with epsilon edges.

    byte_edges[q] maps a byte to the list of successor states; eps_edges[q]
    lists epsilon successors. Thompson construction yields a single accept
    state, but `accepts` is a set to keep the type general.
    """

    byte_edges: list[dict[int, list[int]]] = field(default_factory=list)
    eps_edges: list[list[int]] = field(default_factory=list)
    start: int = 0
    accepts: frozenset[int] = frozenset()

    @property
    def num_states(self) -> int:
        return len(self.byte_edges)


def expand_repeats(node: Node) -> Node:
    """Rewrite Repeat nodes into Concat/Optional/Star form.

    {m,n} becomes m required copies plus (n-m) optional ones; {m,} becomes
    m copies followed by a star. Runs before Thompson construction so the
    builder only sees the six core node kinds.
    """
    if isinstance(node, Repeat):
        child = expand_repeats(node.child)
        parts: list[Node] = [child] * node.min
        if node.max is None:
            parts.append(Star(child))
        else:
            parts.extend(Optional(child) for _ in range(node.max - node.min))
        if not parts:
            return Empty()
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))
    if isinstance(node, Concat):
        return Concat(tuple(expand_repeats(p) for p in node.parts))
    if isinstance(node, Alternation):
        return Alternation(tuple(expand_repeats(o) for o in node.options))
    if isinstance(node, Star):
        return Star(expand_repeats(node.child))
    if isinstance(node, Plus):
        return Plus(expand_repeats(node.child))
    if isinstance(node, Optional):
        return Optional(expand_repeats(node.child))
    return node


class _Builder:
    def __init__(self) -> None:
        self.byte_edges: list[dict[int, list[int]]] = []
        self.eps_edges: list[list[int]] = []

    def new_state(self) -> int:
        self.byte_edges.append({})
        self.eps_edges.append([])
        return len(self.byte_edges) - 1

    def add_byte(self, src: int, byte: int, dst: int) -> None:
        self.byte_edges[src].setdefault(byte, []).append(dst)

    def add_eps(self, src: int, dst: int) -> None:
        self.eps_edges[src].append(dst)

    def fragment(self, node: Node) -> tuple[int, int]:
        """Build a sub-NFA for `node`, returning its (enter, exit) states."""
        enter = self.new_state()
        exit_ = self.new_state()
        if isinstance(node, Empty):
            self.add_eps(enter, exit_)
        elif isinstance(node, Literal):
            self.add_byte(enter, node.byte, exit_)
        elif isinstance(node, ByteClass):
            for lo, hi in node.ranges:
                for b in range(lo, hi + 1):
                    self.add_byte(enter, b, exit_)
        elif isinstance(node, Concat):
            if not node.parts:
                self.add_eps(enter, exit_)
            else:
                prev_exit = enter
                for part in node.parts:
                    e, x = self.fragment(part)
                    self.add_eps(prev_exit, e)
                    prev_exit = x
                self.add_eps(prev_exit, exit_)
        elif isinstance(node, Alternation):
            # Zero options: no path from enter to exit (empty language).
            for option in node.options:
                e, x = self.fragment(option)
                self.add_eps(enter, e)
                self.add_eps(x, exit_)
        elif isinstance(node, Star):
            e, x = self.fragment(node.child)
            self.add_eps(enter, e)
            self.add_eps(enter, exit_)
            self.add_eps(x, e)
            self.add_eps(x, exit_)
        elif isinstance(node, Plus):
            e, x = self.fragment(node.child)
            self.add_eps(enter, e)
            self.add_eps(x, e)
            self.add_eps(x, exit_)
        elif isinstance(node, Optional):
            e, x = self.fragment(node.child)
            self.add_eps(enter, e)
            self.add_eps(enter, exit_)
            self.add_eps(x, exit_)
        else:
            raise TypeError(f"unexpected node type {type(node).__name__}")
        return enter, exit_


def compile_nfa(ast: Node) -> Nfa:
    """Compile an AST into an NFA accepting the same language."""
    builder = _Builder()
    enter, exit_ = builder.fragment(expand_repeats(ast))
    return Nfa(
        byte_edges=builder.byte_edges,
        eps_edges=builder.eps_edges,
        start=enter,
        accepts=frozenset({exit_}),
    )


def nfa_to_dot(nfa: Nfa) -> str:
    """Render the NFA in DOT: doubled circles mark accept states."""
    lines = ["digraph nfa {", "  rankdir=LR;"]
    for q in range(nfa.num_states):
        shape = "doublecircle" if q in nfa.accepts else "circle"
        lines.append(f'  n{q} [shape={shape} label="{q}"];')
    lines.append(f"  start [shape=point]; start -> n{nfa.start};")
    for q in range(nfa.num_states):
        for byte, targets in sorted(nfa.byte_edges[q].items()):
            for t in targets:
                lines.append(f'  n{q} -> n{t} [label="{_byte_label(byte)}"];')
        for t in nfa.eps_edges[q]:
            lines.append(f'  n{q} -> n{t} [label="&epsilon;" style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _byte_label(byte: int) -> str:
    if 0x20 <= byte <= 0x7E and chr(byte) not in '"\\':
        return chr(byte)
    return f"0x{byte:02x}"
