"""Subset-construction determinization and Hopcroft minimization.

DFAs are partial: a missing (state, byte) transition rejects. States are
canonically numbered by breadth-first discovery order (ascending byte order),
so equal languages built the same way serialize identically.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from ..errors import ResourceLimitError
from .nfa import Nfa

DEFAULT_STATE_CAP = 1_000_000


@dataclass
class Dfa:
    """Deterministic automaton over bytes; start is always state 0."""

    transitions: list[dict[int, int]]
    accepts: frozenset[int]
    start: int = 0

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    def walk(self, data: bytes, state: int | None = None) -> int | None:
        """Follow `data` from `state` (default: start); None when stuck."""
        q = self.start if state is None else state
        for b in data:
            nxt = self.transitions[q].get(b)
            if nxt is None:
                return None
            q = nxt
        return q


def dfa_matches(dfa: Dfa, data: bytes) -> bool:
    """Full anchored match: all bytes consumed, ending in an accept state."""
    end = dfa.walk(data)
    return end is not None and end in dfa.accepts


def determinize(nfa: Nfa, *, max_states: int = DEFAULT_STATE_CAP) -> Dfa:
    """Subset construction; only reachable subsets are ever materialized.

    States that cannot reach an accept state are pruned afterwards, so the
    result is live everywhere. Raises ResourceLimitError past `max_states`.
    """
    closures = _epsilon_closures(nfa)

    def closure_of(states) -> frozenset[int]:
        out: set[int] = set()
        for s in states:
            out.update(closures[s])
        return frozenset(out)

    start_set = frozenset(closures[nfa.start])
    ids: dict[frozenset[int], int] = {start_set: 0}
    transitions: list[dict[int, int]] = [{}]
    accepts: set[int] = set()
    if start_set & nfa.accepts:
        accepts.add(0)

    queue = deque([start_set])
    while queue:
        current = queue.popleft()
        cur_id = ids[current]
        moves: dict[int, set[int]] = defaultdict(set)
        for q in current:
            for byte, targets in nfa.byte_edges[q].items():
                moves[byte].update(targets)
        for byte in sorted(moves):
            target = closure_of(moves[byte])
            if target not in ids:
                if len(ids) >= max_states:
                    raise ResourceLimitError("DFA state count", max_states)
                ids[target] = len(transitions)
                transitions.append({})
                if target & nfa.accepts:
                    accepts.add(ids[target])
                queue.append(target)
            transitions[cur_id][byte] = ids[target]

    transitions, accepts = _prune_dead(transitions, accepts)
    transitions, accepts = _renumber(transitions, accepts)
    return Dfa(transitions=transitions, accepts=frozenset(accepts))


def _epsilon_closures(nfa: Nfa) -> list[frozenset[int]]:
    closures: list[frozenset[int]] = []
    for s in range(nfa.num_states):
        seen = {s}
        stack = [s]
        while stack:
            q = stack.pop()
            for t in nfa.eps_edges[q]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        closures.append(frozenset(seen))
    return closures


def _prune_dead(
    transitions: list[dict[int, int]], accepts: set[int]
) -> tuple[list[dict[int, int]], set[int]]:
    """Drop states from which no accept state is reachable (start survives)."""
    n = len(transitions)
    reverse: dict[int, set[int]] = defaultdict(set)
    for q, edges in enumerate(transitions):
        for t in edges.values():
            reverse[t].add(q)
    live = set(accepts)
    stack = list(accepts)
    while stack:
        q = stack.pop()
        for p in reverse[q]:
            if p not in live:
                live.add(p)
                stack.append(p)
    if 0 not in live:
        return [{}], set()
    keep = sorted(live)
    remap = {old: new for new, old in enumerate(keep)}
    new_transitions = [
        {b: remap[t] for b, t in transitions[old].items() if t in live}
        for old in keep
    ]
    new_accepts = {remap[q] for q in accepts}
    assert remap[0] == 0
    return new_transitions, new_accepts


def _renumber(
    transitions: list[dict[int, int]], accepts: set[int]
) -> tuple[list[dict[int, int]], set[int]]:
    """Canonical breadth-first renumbering from state 0, bytes ascending."""
    order: dict[int, int] = {0: 0}
    queue = deque([0])
    while queue:
        q = queue.popleft()
        for byte in sorted(transitions[q]):
            t = transitions[q][byte]
            if t not in order:
                order[t] = len(order)
                queue.append(t)
    new_transitions: list[dict[int, int]] = [{} for _ in order]
    for old, new in order.items():
        new_transitions[new] = {
            b: order[t] for b, t in transitions[old].items() if t in order
        }
    new_accepts = {order[q] for q in accepts if q in order}
    return new_transitions, new_accepts


def minimize(dfa: Dfa) -> Dfa:
    """Hopcroft partition refinement over the partial DFA.

    An implicit sink absorbs missing transitions during refinement and is
    dropped from the result, so the output stays partial and live. The result
    is canonically renumbered; minimize is idempotent.
    """
    if not dfa.accepts:
        return Dfa(transitions=[{}], accepts=frozenset())
    n = dfa.num_states
    sink = n
    alphabet = sorted({b for edges in dfa.transitions for b in edges})

    # Reverse image: rev[byte][target] -> set of sources (sink included).
    rev: dict[int, dict[int, set[int]]] = {b: defaultdict(set) for b in alphabet}
    for q in range(n):
        edges = dfa.transitions[q]
        for b in alphabet:
            rev[b][edges.get(b, sink)].add(q)
    for b in alphabet:
        rev[b][sink].add(sink)

    accepting = set(dfa.accepts)
    rest = (set(range(n)) - accepting) | {sink}
    blocks: list[set[int]] = [accepting, rest]
    block_of = {q: 0 for q in accepting}
    block_of.update({q: 1 for q in rest})
    worklist: set[int] = {0 if len(accepting) <= len(rest) else 1}

    while worklist:
        splitter = worklist.pop()
        # Snapshot: the splitter block may itself split during this pass.
        splitter_set = frozenset(blocks[splitter])
        for b in alphabet:
            preimage: set[int] = set()
            for t in splitter_set:
                preimage.update(rev[b].get(t, ()))
            touched: dict[int, set[int]] = defaultdict(set)
            for q in preimage:
                touched[block_of[q]].add(q)
            for bid, inside in touched.items():
                if len(inside) == len(blocks[bid]):
                    continue
                new_id = len(blocks)
                blocks[bid] -= inside
                blocks.append(inside)
                for q in inside:
                    block_of[q] = new_id
                if bid in worklist:
                    worklist.add(new_id)
                else:
                    worklist.add(
                        new_id if len(inside) <= len(blocks[bid]) else bid
                    )

    sink_block = block_of[sink]
    merged: list[dict[int, int]] = [{} for _ in blocks]
    for q in range(n):
        bq = block_of[q]
        for byte, t in dfa.transitions[q].items():
            if block_of[t] != sink_block:
                merged[bq][byte] = block_of[t]
    merged_accepts = {block_of[q] for q in dfa.accepts}

    # Re-root at the start state's block and renumber canonically.
    start_block = block_of[dfa.start]
    if start_block == sink_block:
        return Dfa(transitions=[{}], accepts=frozenset())
    swap = {start_block: 0, 0: start_block}
    reindexed = [
        {b: swap.get(t, t) for b, t in merged[swap.get(i, i)].items()}
        for i in range(len(blocks))
    ]
    reindexed_accepts = {swap.get(q, q) for q in merged_accepts}
    transitions, accepts = _renumber(reindexed, reindexed_accepts)
    return Dfa(transitions=transitions, accepts=frozenset(accepts))


def dfa_to_text(dfa: Dfa) -> str:
    """Canonical line-oriented serialization (stable across equal builds)."""
    lines = [f"dfa states={dfa.num_states} start={dfa.start}"]
    lines.append("accept " + " ".join(str(q) for q in sorted(dfa.accepts)))
    for q, edges in enumerate(dfa.transitions):
        for byte in sorted(edges):
            lines.append(f"trans {q} {byte} {edges[byte]}")
    return "\n".join(lines) + "\n"


def dfa_to_dot(dfa: Dfa) -> str:
    """Render the DFA in DOT: doubled circles mark accept states."""
    lines = ["digraph dfa {", "  rankdir=LR;"]
    for q in range(dfa.num_states):
        shape = "doublecircle" if q in dfa.accepts else "circle"
        lines.append(f'  s{q} [shape={shape} label="{q}"];')
    lines.append(f"  start [shape=point]; start -> s{dfa.start};")
    for q, edges in enumerate(dfa.transitions):
        # Group consecutive bytes with the same target into range labels.
        by_target: dict[int, list[int]] = defaultdict(list)
        for byte, t in sorted(edges.items()):
            by_target[t].append(byte)
        for t, bytes_ in sorted(by_target.items()):
            label = _ranges_label(bytes_)
            lines.append(f'  s{q} -> s{t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _ranges_label(bytes_: list[int]) -> str:
    spans: list[tuple[int, int]] = []
    for b in bytes_:
        if spans and b == spans[-1][1] + 1:
            spans[-1] = (spans[-1][0], b)
        else:
            spans.append((b, b))
    parts = []
    for lo, hi in spans:
        if lo == hi:
            parts.append(_printable(lo))
        else:
            parts.append(f"{_printable(lo)}-{_printable(hi)}")
    return ",".join(parts)


def _printable(byte: int) -> str:
    if 0x20 <= byte <= 0x7E and chr(byte) not in '"\\':
        return chr(byte)
    return f"0x{byte:02x}"
