"""Transduce a byte-level DFA into a token-level automaton.

The token automaton accepts exactly the token sequences whose decoded byte
strings the DFA accepts. Construction walks the vocabulary trie and the DFA
in lockstep from every discovered DFA state, so shared token prefixes are
traversed once per state rather than once per token.

With terminated=True every DFA-accepting state gains an EOS edge to a fresh
sink, which becomes the sole accept state: accepted sequences then end in
exactly one EOS. States that cannot reach an accept state are pruned at build
time, so traversal never enters a state from which acceptance is impossible
(for unbounded sequence length; length budgets are the traversal layer's
concern).
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from .errors import EngineError, ResourceLimitError
from .regex.dfa import Dfa
from .vocab import TokenTrie, Vocabulary

DEFAULT_TOKEN_STATE_CAP = 1_000_000
DEFAULT_TOKEN_EDGE_CAP = 50_000_000


@dataclass
class TokenAutomaton:
    """Deterministic automaton whose edge labels are token ids.

    dfa_state[q] tags each state with the byte-DFA state it came from
    (None for the terminated-mode EOS sink). Duplicate-string tokens appear
    as parallel edges with distinct ids and the same successor.
    """

    edges: list[dict[int, int]]
    accepts: frozenset[int]
    dfa_state: tuple[int | None, ...]
    terminated: bool
    eos_id: int
    start: int = 0

    @property
    def num_states(self) -> int:
        return len(self.edges)

    @property
    def num_edges(self) -> int:
        return sum(len(e) for e in self.edges)


def transduce(
    dfa: Dfa,
    vocab: Vocabulary,
    trie: TokenTrie,
    *,
    terminated: bool = False,
    deny_list: frozenset[int] | set[int] = frozenset(),
    max_states: int = DEFAULT_TOKEN_STATE_CAP,
    max_edges: int = DEFAULT_TOKEN_EDGE_CAP,
) -> TokenAutomaton:
    """Build the token automaton for `dfa` under `vocab`.

    deny_list removes token ids from consideration entirely; denying EOS with
    terminated=True is an error since termination needs the EOS edge.
    """
    deny = frozenset(deny_list)
    if terminated and vocab.eos_id in deny:
        raise EngineError("EOS cannot be denied when terminated=True")

    # Token-level edges between DFA states, discovered from the DFA start.
    edges_by_dfa: dict[int, dict[int, int]] = {}
    queue = deque([dfa.start])
    seen = {dfa.start}
    edge_count = 0
    while queue:
        q = queue.popleft()
        out: dict[int, int] = {}
        # Lockstep walk: trie node x DFA state, rooted at (ROOT, q).
        stack = [(trie.ROOT, q)]
        while stack:
            node, d = stack.pop()
            for token_id in trie.terminals[node]:
                if token_id in deny:
                    continue
                out[token_id] = d
                edge_count += 1
                if edge_count > max_edges:
                    raise ResourceLimitError("token automaton edge count", max_edges)
            for byte, child in trie.children[node].items():
                d_next = dfa.transitions[d].get(byte)
                if d_next is not None:
                    stack.append((child, d_next))
        edges_by_dfa[q] = out
        for target in out.values():
            if target not in seen:
                if len(seen) >= max_states:
                    raise ResourceLimitError("token automaton state count", max_states)
                seen.add(target)
                queue.append(target)

    states = sorted(seen)
    index = {q: i for i, q in enumerate(states)}
    edges: list[dict[int, int]] = [
        {t: index[target] for t, target in edges_by_dfa[q].items()} for q in states
    ]
    dfa_tags: list[int | None] = list(states)

    if terminated:
        sink = len(edges)
        edges.append({})
        dfa_tags.append(None)
        for q in states:
            if q in dfa.accepts:
                edges[index[q]][vocab.eos_id] = sink
        accepts = {sink}
    else:
        accepts = {index[q] for q in states if q in dfa.accepts}

    return _prune_and_renumber(edges, accepts, dfa_tags, index[dfa.start], terminated, vocab.eos_id)


def _prune_and_renumber(
    edges: list[dict[int, int]],
    accepts: set[int],
    dfa_tags: list[int | None],
    start: int,
    terminated: bool,
    eos_id: int,
) -> TokenAutomaton:
    """Drop states that cannot reach an accept, then renumber from the start
    state in breadth-first order (ascending token id) for a canonical form."""
    reverse: dict[int, set[int]] = defaultdict(set)
    for q, out in enumerate(edges):
        for target in out.values():
            reverse[target].add(q)
    live = set(accepts)
    stack = list(accepts)
    while stack:
        q = stack.pop()
        for p in reverse[q]:
            if p not in live:
                live.add(p)
                stack.append(p)
    live.add(start)

    order: dict[int, int] = {start: 0}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for token_id in sorted(edges[q]):
            t = edges[q][token_id]
            if t in live and t not in order:
                order[t] = len(order)
                queue.append(t)
    new_edges: list[dict[int, int]] = [{} for _ in order]
    new_tags: list[int | None] = [None] * len(order)
    for old, new in order.items():
        new_edges[new] = {
            tok: order[t] for tok, t in edges[old].items() if t in live and t in order
        }
        new_tags[new] = dfa_tags[old]
    new_accepts = frozenset(order[q] for q in accepts if q in order)
    return TokenAutomaton(
        edges=new_edges,
        accepts=new_accepts,
        dfa_state=tuple(new_tags),
        terminated=terminated,
        eos_id=eos_id,
    )


def accepts(ta: TokenAutomaton, tokens) -> bool:
    """Run a token sequence; unknown or denied ids simply fail to match."""
    q = ta.start
    for t in tokens:
        nxt = ta.edges[q].get(t)
        if nxt is None:
            return False
        q = nxt
    return q in ta.accepts


def automaton_to_text(ta: TokenAutomaton) -> str:
    """Canonical line-oriented serialization for golden tests."""
    lines = [
        f"token-automaton states={ta.num_states} start={ta.start} "
        f"terminated={int(ta.terminated)} eos={ta.eos_id}"
    ]
    for q in range(ta.num_states):
        tag = "sink" if ta.dfa_state[q] is None else str(ta.dfa_state[q])
        mark = " accept" if q in ta.accepts else ""
        lines.append(f"state {q} dfa={tag}{mark}")
    for q in range(ta.num_states):
        for token_id in sorted(ta.edges[q]):
            lines.append(f"edge {q} {token_id} {ta.edges[q][token_id]}")
    return "\n".join(lines) + "\n"


def export_dot(ta: TokenAutomaton, vocab: Vocabulary) -> str:
    """Render in DOT; edges carry the token id and its decoded bytes."""
    lines = ["digraph token_automaton {", "  rankdir=LR;"]
    for q in range(ta.num_states):
        shape = "doublecircle" if q in ta.accepts else "circle"
        lines.append(f'  t{q} [shape={shape} label="{q}"];')
    lines.append(f"  start [shape=point]; start -> t{ta.start};")
    for q in range(ta.num_states):
        for token_id in sorted(ta.edges[q]):
            target = ta.edges[q][token_id]
            if token_id == ta.eos_id:
                label = f"{token_id}:<eos>"
            else:
                label = f"{token_id}:{_bytes_label(vocab.entries[token_id])}"
            lines.append(f'  t{q} -> t{target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _bytes_label(data: bytes) -> str:
    out = []
    for b in data:
        if 0x20 <= b <= 0x7E and chr(b) not in '"\\':
            out.append(chr(b))
        else:
            out.append(f"\\\\x{b:02x}")
    return "".join(out)
