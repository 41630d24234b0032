"""Last-word prediction with a ladder of increasingly constrained queries.

Query types:

* baseline   — any word shape at all, decoded greedily (top-k of 1); what an
               unconstrained model would produce.
* word       — the answer must be one of the distinct words already used in
               the context.
* terminated — a context word followed by end-of-sequence, so the model must
               also want to stop there.
* no_stop    — terminated, with function words (articles, pronouns,
               prepositions) removed from the candidates.

Each prediction is the first result of lowest-cost-first enumeration over the
query's automaton, conditioned on the tokenized context.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import EngineError
from ..regex import compile_regex, escape
from ..scorers import Scorer
from ..transducer import transduce
from ..traversal import QuerySpec, enumerate_shortest
from ..vocab import Vocabulary, build_trie, greedy_tokenize

QUERY_TYPES = ("baseline", "word", "terminated", "no_stop")

DEFAULT_BASELINE_WORD_REGEX = " [A-Za-z']+"


def default_stop_words() -> frozenset[str]:
    """The packaged ~50-entry function-word list (lowercase)."""
    text = resources.files("regexlm").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def extract_words(context: str) -> list[str]:
    """Distinct whitespace-delimited words, outer punctuation stripped,
    first-use order preserved."""
    seen: dict[str, None] = {}
    for raw in context.split():
        word = raw.strip(string.punctuation)
        if word:
            seen.setdefault(word, None)
    return list(seen)


@dataclass
class LambadaExample:
    context: str
    target_word: str
    predictions: dict[str, str | None] = field(default_factory=dict)


@dataclass
class UnderstandingConfig:
    query_types: tuple[str, ...] = QUERY_TYPES
    stop_words: frozenset[str] | None = None  # None -> packaged default
    max_examples: int | None = None
    baseline_word_regex: str = DEFAULT_BASELINE_WORD_REGEX
    leading_space: bool = True
    top_k: int | None = None
    baseline_top_k: int = 1
    max_match_tokens: int = 16
    deny_list: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        unknown = set(self.query_types) - set(QUERY_TYPES)
        if unknown:
            raise EngineError(f"unknown query types: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, obj: dict) -> "UnderstandingConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise EngineError(f"unknown understanding config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        if "query_types" in kwargs:
            kwargs["query_types"] = tuple(kwargs["query_types"])
        if kwargs.get("stop_words") is not None:
            kwargs["stop_words"] = frozenset(kwargs["stop_words"])
        if "deny_list" in kwargs:
            kwargs["deny_list"] = tuple(kwargs["deny_list"])
        return cls(**kwargs)


@dataclass
class UnderstandingReport:
    accuracies: dict[str, float]
    hits: dict[str, int]
    num_examples: int
    examples: list[LambadaExample]

    def to_csv(self) -> str:
        lines = ["query_type,hits,examples,accuracy"]
        for qtype, accuracy in self.accuracies.items():
            lines.append(f"{qtype},{self.hits[qtype]},{self.num_examples},{accuracy:.6f}")
        return "\n".join(lines) + "\n"


def load_dataset(path: str | Path) -> list[tuple[str, str]]:
    """JSON-lines rows {"context": ..., "target": ...}."""
    rows: list[tuple[str, str]] = []
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rows.append((obj["context"], obj["target"]))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise EngineError(f"dataset line {line_no}: {exc}") from exc
    return rows


def run_language_understanding(
    scorer: Scorer,
    vocab: Vocabulary,
    dataset: Iterable[tuple[str, str] | dict],
    config: UnderstandingConfig,
) -> UnderstandingReport:
    """Accuracy per query type; a target counts only on exact word match.

    Examples whose candidate set is empty (for no_stop, after filtering) are
    automatic misses with a None prediction.
    """
    trie = build_trie(vocab)
    stop_words = (
        default_stop_words() if config.stop_words is None else config.stop_words
    )
    deny = frozenset(config.deny_list)

    def automaton_for(pattern: str, terminated: bool):
        return transduce(
            compile_regex(pattern), vocab, trie, terminated=terminated, deny_list=deny
        )

    baseline_automaton = automaton_for(config.baseline_word_regex, terminated=False)

    examples: list[LambadaExample] = []
    hits = {qtype: 0 for qtype in config.query_types}
    for row in dataset:
        if config.max_examples is not None and len(examples) >= config.max_examples:
            break
        context, target = (row["context"], row["target"]) if isinstance(row, dict) else row
        example = LambadaExample(context=context, target_word=target)
        context_tokens = tuple(greedy_tokenize(vocab, trie, context.encode("utf-8")))
        words = extract_words(context)

        for qtype in config.query_types:
            prediction: str | None = None
            if qtype == "baseline":
                prediction = _first_word(
                    baseline_automaton, scorer, vocab, context_tokens,
                    config, top_k=config.baseline_top_k,
                )
            else:
                candidates = words
                if qtype == "no_stop":
                    candidates = [w for w in words if w.lower() not in stop_words]
                if candidates:
                    pattern = _word_alternation(candidates, config.leading_space)
                    automaton = automaton_for(pattern, terminated=qtype != "word")
                    prediction = _first_word(
                        automaton, scorer, vocab, context_tokens,
                        config, top_k=config.top_k,
                    )
            example.predictions[qtype] = prediction
            if prediction == target:
                hits[qtype] += 1
        examples.append(example)

    count = len(examples)
    accuracies = {
        qtype: (hits[qtype] / count if count else 0.0) for qtype in config.query_types
    }
    return UnderstandingReport(
        accuracies=accuracies, hits=hits, num_examples=count, examples=examples
    )


def _word_alternation(words: Sequence[str], leading_space: bool) -> str:
    body = "(" + "|".join(f"({escape(w)})" for w in words) + ")"
    return (" " if leading_space else "") + body


def _first_word(
    automaton, scorer, vocab, context_tokens, config: UnderstandingConfig, top_k
) -> str | None:
    spec = QuerySpec(
        automaton=automaton,
        prompt=context_tokens,
        top_k=top_k,
        max_match_tokens=config.max_match_tokens,
    )
    for result in enumerate_shortest(spec, scorer, vocab, limit=1):
        text = result.decoded.decode("utf-8", errors="replace")
        return text[1:] if config.leading_space and text.startswith(" ") else text
    return None
