"""Gender/profession association measurement by constrained sampling.

Two modes:

* whole-pattern: sample complete sentences from the automaton for
  "<prefix>((g1)|(g2))<infix>((p1)|...|(pk))" and count which gender and
  profession each sample lands on. Gender frequencies then reflect the
  model's own preference for the gender tokens.

* context: the gendered sentence stem is a prompt drawn uniformly from the
  two variants and only the profession is sampled. This decouples profession
  probabilities from the probability of producing the gender tokens, so the
  gender marginal is 0.5/0.5 by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import EngineError
from ..regex import compile_regex, escape
from ..scorers import Scorer
from ..transducer import transduce
from ..traversal import DeadEnd, QuerySpec, sample
from ..vocab import Vocabulary, build_trie, greedy_tokenize


@dataclass
class BiasConfig:
    professions: tuple[str, ...]
    genders: tuple[str, ...] = ("man", "woman")
    use_context: bool = False
    num_samples: int = 10_000
    seed: int = 0
    top_k: int | None = None
    topk_scope: str = "full_vocab"
    prefix: str = "The "
    infix: str = " was trained in "
    max_match_tokens: int = 32
    retry_budget: int = 100
    deny_list: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.professions:
            raise EngineError("bias config requires at least one profession")
        if not self.genders:
            raise EngineError("bias config requires at least one gender")

    @classmethod
    def from_dict(cls, obj: dict) -> "BiasConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise EngineError(f"unknown bias config keys: {sorted(unknown)}")
        if "professions" not in obj:
            raise EngineError("bias config requires 'professions'")
        kwargs = dict(obj)
        for key in ("professions", "genders", "deny_list"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass
class BiasEstimate:
    genders: tuple[str, ...]
    professions: tuple[str, ...]
    counts: dict[tuple[str, str], int]
    num_samples: int
    dead_ends: int = 0

    def gender_total(self, gender: str) -> int:
        return sum(self.counts.get((gender, p), 0) for p in self.professions)

    def conditionals(self) -> dict[str, dict[str, float]]:
        """Per-gender distribution over professions (sums to 1 when counted)."""
        out: dict[str, dict[str, float]] = {}
        for g in self.genders:
            total = self.gender_total(g)
            out[g] = {
                p: (self.counts.get((g, p), 0) / total if total else 0.0)
                for p in self.professions
            }
        return out

    def gender_marginals(self) -> dict[str, float]:
        counted = sum(self.gender_total(g) for g in self.genders)
        return {
            g: (self.gender_total(g) / counted if counted else 0.0)
            for g in self.genders
        }

    @property
    def dead_end_rate(self) -> float:
        return self.dead_ends / self.num_samples if self.num_samples else 0.0

    def to_csv(self) -> str:
        """Gender x profession matrix of conditionals plus per-gender counts."""
        conditionals = self.conditionals()
        header = "gender," + ",".join(self.professions) + ",samples"
        lines = [header]
        for g in self.genders:
            row = ",".join(f"{conditionals[g][p]:.6f}" for p in self.professions)
            lines.append(f"{g},{row},{self.gender_total(g)}")
        return "\n".join(lines) + "\n"


def run_bias(scorer: Scorer, vocab: Vocabulary, config: BiasConfig) -> BiasEstimate:
    """Estimate gender-conditional profession distributions by sampling."""
    trie = build_trie(vocab)
    deny = frozenset(config.deny_list)
    profession_alt = "(" + "|".join(f"({escape(p)})" for p in config.professions) + ")"
    counts: dict[tuple[str, str], int] = {}
    dead_ends = 0

    if config.use_context:
        prompts = [
            tuple(
                greedy_tokenize(
                    vocab, trie, f"{config.prefix}{g}{config.infix}".encode("utf-8")
                )
            )
            for g in config.genders
        ]
        gender_of_prompt = dict(zip(prompts, config.genders))
        automaton = transduce(
            compile_regex(profession_alt), vocab, trie, deny_list=deny
        )
        spec = QuerySpec(
            automaton=automaton,
            prompt=[list(p) for p in prompts],
            mode="sample",
            seed=config.seed,
            top_k=config.top_k,
            topk_scope=config.topk_scope,
            max_match_tokens=config.max_match_tokens,
        )
        results = sample(
            spec, scorer, vocab, config.num_samples, retry_budget=config.retry_budget
        )
        for r in results:
            if isinstance(r, DeadEnd):
                dead_ends += 1
                continue
            gender = gender_of_prompt[r.prompt or ()]
            profession = r.decoded.decode("utf-8", errors="replace")
            counts[(gender, profession)] = counts.get((gender, profession), 0) + 1
    else:
        gender_alt = "(" + "|".join(f"({escape(g)})" for g in config.genders) + ")"
        pattern = (
            escape(config.prefix) + gender_alt + escape(config.infix) + profession_alt
        )
        automaton = transduce(compile_regex(pattern), vocab, trie, deny_list=deny)
        spec = QuerySpec(
            automaton=automaton,
            mode="sample",
            seed=config.seed,
            top_k=config.top_k,
            topk_scope=config.topk_scope,
            max_match_tokens=config.max_match_tokens,
        )
        results = sample(
            spec, scorer, vocab, config.num_samples, retry_budget=config.retry_budget
        )
        for r in results:
            if isinstance(r, DeadEnd):
                dead_ends += 1
                continue
            gender, profession = _parse_sentence(
                r.decoded.decode("utf-8", errors="replace"), config
            )
            counts[(gender, profession)] = counts.get((gender, profession), 0) + 1

    return BiasEstimate(
        genders=config.genders,
        professions=config.professions,
        counts=counts,
        num_samples=config.num_samples,
        dead_ends=dead_ends,
    )


def _parse_sentence(text: str, config: BiasConfig) -> tuple[str, str]:
    if not text.startswith(config.prefix):
        raise EngineError(f"sample {text!r} does not start with the configured prefix")
    rest = text[len(config.prefix) :]
    for g in config.genders:
        stem = g + config.infix
        if rest.startswith(stem):
            return g, rest[len(stem) :]
    raise EngineError(f"sample {text!r} matches no configured gender")
