"""Traverse a token automaton under a scorer.

Two modes:

* lowest-cost-first enumeration — Dijkstra over the prefix tree of token
  sequences, where an edge costs the negative log-probability of its token
  given the full prefix (prompt included). Because the cost of a token
  depends on everything before it, search nodes are (token prefix, automaton
  state) pairs rather than bare automaton states; the tree structure also
  guarantees no token sequence is emitted twice. Results stream in
  nondecreasing cost, ties broken by token-id lexicographic order with
  shorter sequences first.

* constrained sampling — walk the automaton sampling each step from the
  renormalized allowed-token distribution, used to estimate statistical
  properties of the matching language.

Top-k can be applied against the full vocabulary (an automaton edge outside
the model's top-k becomes unreachable) or against the allowed edges only
(never dead-ends). The former mirrors how an unconstrained decoder would
behave and is the default.
"""

from __future__ import annotations

import base64
import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .scorers import Scorer, top_k_set
from .transducer import TokenAutomaton
from .vocab import Vocabulary

DEFAULT_MAX_MATCH_TOKENS = 64
DEFAULT_RETRY_BUDGET = 100

TOPK_FULL_VOCAB = "full_vocab"
TOPK_ALLOWED_ONLY = "allowed_only"

Prompt = tuple[int, ...]


@dataclass
class QuerySpec:
    """A traversal request.

    prompt is either a single token-id sequence or a non-empty set of
    sequences to choose from uniformly per sample (sampling mode only).
    top_k=None means unlimited. max_match_tokens bounds match length so that
    star patterns stay enumerable.
    """

    automaton: TokenAutomaton
    prompt: Sequence[int] | Sequence[Sequence[int]] = ()
    top_k: int | None = None
    max_match_tokens: int = DEFAULT_MAX_MATCH_TOKENS
    mode: str = "shortest"
    seed: int = 0
    topk_scope: str = TOPK_FULL_VOCAB

    def __post_init__(self) -> None:
        if self.max_match_tokens < 1:
            raise ValueError("max_match_tokens must be >= 1")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1 (or None for unlimited)")
        if self.mode not in ("shortest", "sample"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.topk_scope not in (TOPK_FULL_VOCAB, TOPK_ALLOWED_ONLY):
            raise ValueError(f"unknown topk_scope {self.topk_scope!r}")
        if not self.prompt_choices():
            raise ValueError("prompt choice set must be non-empty")

    def prompt_choices(self) -> tuple[Prompt, ...]:
        """Normalize the prompt field to a tuple of candidate prompts."""
        items = list(self.prompt)
        if not items:
            return ((),)
        if all(isinstance(x, int) for x in items):
            return (tuple(items),)
        return tuple(tuple(choice) for choice in items)


@dataclass(order=True)
class SearchNode:
    """Dijkstra frontier entry; ordering is (cost, tokens) so equal-cost
    nodes pop in token-id lexicographic order, shorter first."""

    cost: float
    tokens: tuple[int, ...]
    state: int = field(compare=False)


@dataclass
class MatchResult:
    tokens: tuple[int, ...]
    decoded: bytes
    logprob: float
    rank: int | None = None
    prompt: Prompt | None = None

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "rank": self.rank,
                "tokens": list(self.tokens),
                "decoded_b64": base64.b64encode(self.decoded).decode("ascii"),
                "logprob": self.logprob,
            }
        )


@dataclass(frozen=True)
class DeadEnd:
    """A sample whose every attempt hit an empty allowed set."""

    attempts: int


def decode(vocab: Vocabulary, tokens: Sequence[int]) -> bytes:
    """Concatenated token bytes; EOS contributes nothing."""
    return vocab.decode(tokens)


def _allowed_tokens(
    out_edges: dict[int, int],
    logprobs: np.ndarray,
    top_k: int | None,
    topk_scope: str,
) -> list[int]:
    if top_k is None:
        return sorted(out_edges)
    if topk_scope == TOPK_FULL_VOCAB:
        return sorted(top_k_set(logprobs, top_k) & out_edges.keys())
    ranked = sorted(out_edges, key=lambda t: (-logprobs[t], t))
    return sorted(ranked[: top_k])


def _single_prompt(spec: QuerySpec) -> Prompt:
    choices = spec.prompt_choices()
    if len(choices) != 1:
        raise ValueError("shortest mode requires a single prompt, not a choice set")
    return choices[0]


def enumerate_shortest(
    spec: QuerySpec,
    scorer: Scorer,
    vocab: Vocabulary,
    limit: int | None = None,
) -> Iterator[MatchResult]:
    """Yield accepted matches in nondecreasing cost without duplicates.

    The stream ends at `limit` results, frontier exhaustion, or when every
    remaining candidate is blocked by max_match_tokens. Edge costs -log p are
    nonnegative, so popping order is emission order. Probability-zero tokens
    are never expanded: enumeration covers exactly the sequences sampling
    could produce.
    """
    if limit is not None and limit <= 0:
        return
    prompt = _single_prompt(spec)
    ta = spec.automaton
    frontier: list[SearchNode] = [SearchNode(0.0, (), ta.start)]
    emitted = 0
    while frontier:
        node = heapq.heappop(frontier)
        if node.state in ta.accepts:
            emitted += 1
            yield MatchResult(
                tokens=node.tokens,
                decoded=vocab.decode(node.tokens),
                logprob=-node.cost,
                rank=emitted,
                prompt=prompt if prompt else None,
            )
            if limit is not None and emitted >= limit:
                return
        if len(node.tokens) >= spec.max_match_tokens:
            continue
        out = ta.edges[node.state]
        if not out:
            continue
        logprobs = scorer.next_logprobs(prompt + node.tokens)
        for t in _allowed_tokens(out, logprobs, spec.top_k, spec.topk_scope):
            lp = float(logprobs[t])
            if lp == -math.inf:
                continue  # probability-zero token: outside the support
            heapq.heappush(
                frontier,
                SearchNode(node.cost - lp, node.tokens + (t,), out[t]),
            )


_STOP = -1  # sentinel option: stop at an accepting state (non-terminated mode)


def sample(
    spec: QuerySpec,
    scorer: Scorer,
    vocab: Vocabulary,
    num_samples: int,
    *,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> list[MatchResult | DeadEnd]:
    """Draw matches by constrained ancestral sampling.

    Each step renormalizes the scorer's distribution over the allowed tokens
    (top-k intersected with the automaton's outgoing edges). At an accepting
    state of a non-terminated automaton, stopping competes with continuation
    using the model's EOS probability as the stop weight; terminated automata
    stop by taking their explicit EOS edge. An attempt that reaches an empty
    allowed set (or runs out of token budget while not accepting) fails; a
    sample is retried up to `retry_budget` total attempts before a DeadEnd
    marker is recorded. Same seed, same samples.
    """
    rng = np.random.default_rng(spec.seed)
    choices = spec.prompt_choices()
    results: list[MatchResult | DeadEnd] = []
    for _ in range(num_samples):
        outcome: MatchResult | None = None
        attempts = 0
        while attempts < retry_budget and outcome is None:
            attempts += 1
            if len(choices) > 1:
                prompt = choices[int(rng.integers(len(choices)))]
            else:
                prompt = choices[0]
            outcome = _sample_once(spec, scorer, vocab, rng, prompt)
        results.append(outcome if outcome is not None else DeadEnd(attempts=attempts))
    return results


def _sample_once(
    spec: QuerySpec,
    scorer: Scorer,
    vocab: Vocabulary,
    rng: np.random.Generator,
    prompt: Prompt,
) -> MatchResult | None:
    ta = spec.automaton
    state = ta.start
    tokens: tuple[int, ...] = ()
    cost = 0.0
    while True:
        accepting = state in ta.accepts
        out = ta.edges[state]
        if accepting and not out:
            break
        if len(tokens) >= spec.max_match_tokens:
            if accepting:
                break
            return None
        logprobs = scorer.next_logprobs(prompt + tokens)
        options = _allowed_tokens(out, logprobs, spec.top_k, spec.topk_scope)
        weights = [float(np.exp(logprobs[t])) for t in options]
        if accepting and not ta.terminated:
            options = options + [_STOP]
            weights.append(float(np.exp(logprobs[ta.eos_id])))
        total = sum(weights)
        if not options or total <= 0.0:
            return None
        pick = _weighted_pick(rng, weights, total)
        choice = options[pick]
        if choice == _STOP:
            break
        cost -= float(logprobs[choice])
        tokens = tokens + (choice,)
        state = out[choice]
    return MatchResult(
        tokens=tokens,
        decoded=vocab.decode(tokens),
        logprob=-cost,
        prompt=prompt if prompt else None,
    )


def _weighted_pick(rng: np.random.Generator, weights: list[float], total: float) -> int:
    """Inverse-CDF draw; deterministic given the generator state.

    Zero-weight options are never selected: mid-loop they cannot satisfy
    x < acc, and the rounding fallback lands on the last positive weight.
    """
    x = rng.random() * total
    acc = 0.0
    fallback = 0
    for i, w in enumerate(weights):
        if w > 0.0:
            fallback = i
        acc += w
        if x < acc:
            return i
    return fallback
