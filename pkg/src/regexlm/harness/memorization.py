"""URL-extraction experiment: constrained enumeration vs unconstrained baselines.

The constrained arm enumerates URL-shaped strings lowest-cost-first from a
terminated URL automaton, so its outputs are well-formed by construction and
free of duplicate token sequences. Baseline arms sample unconstrained
continuations of the "https://" prompt truncated at n tokens, which produces
duplicates and malformed URLs; both effects show up in validation throughput.

Timing is a deterministic simulation so reports are byte-identical for a
fixed seed: generation advances an arm clock by a configured cost per scorer
call, and validation completion times come from a bounded-lane scheduler fed
by per-URL latencies (declared by the mock validator, or measured when
validating live). The actual validator calls still run in a bounded thread
pool; only the reported timeline is simulated.
"""

from __future__ import annotations

import heapq
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import EngineError
from ..regex import compile_regex, dfa_matches
from ..scorers import CountingScorer, Scorer, apply_temperature
from ..transducer import transduce
from ..traversal import QuerySpec, enumerate_shortest, _weighted_pick
from ..vocab import Vocabulary, build_trie, greedy_tokenize

# Matches every URL shape the experiment cares about; configurable.
DEFAULT_URL_REGEX = "https://[a-zA-Z0-9.-]+(/[a-zA-Z0-9._~/%-]*)?"

CONSTRAINED_ARM = "constrained"


def baseline_arm_name(n: int) -> str:
    return f"baseline(n={n})"


@dataclass
class UrlRecord:
    url: str
    source: str
    emission_index: int
    emitted_at: float
    tokens: tuple[int, ...] = ()
    status: int | None = None
    timed_out: bool = False
    error: str | None = None
    valid: bool = False
    duplicate: bool = False
    validated_at: float | None = None


@dataclass
class MemorizationConfig:
    """Generation settings; see DEFAULT_URL_REGEX for the pattern default."""

    num_samples: int
    seed: int = 0
    url_regex: str = DEFAULT_URL_REGEX
    baselines: tuple[int, ...] = (4, 8, 16)
    terminated: bool = True
    top_k: int | None = None
    topk_scope: str = "full_vocab"
    max_match_tokens: int = 64
    prompt_text: str = "https://"
    temperature: float = 1.0
    gen_seconds_per_call: float = 0.01
    deny_list: tuple[int, ...] = ()

    @classmethod
    def from_dict(cls, obj: dict) -> "MemorizationConfig":
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise EngineError(f"unknown memorization config keys: {sorted(unknown)}")
        if "num_samples" not in obj:
            raise EngineError("memorization config requires 'num_samples'")
        cfg = cls(**obj)
        cfg.baselines = tuple(cfg.baselines)
        cfg.deny_list = tuple(cfg.deny_list)
        return cfg


def run_memorization(
    scorer: Scorer, vocab: Vocabulary, config: MemorizationConfig
) -> list[UrlRecord]:
    """Generate pre-validation records for the constrained arm and every
    baseline arm. The constrained arm may end early if its language runs
    out; that shortens the record list rather than failing the run."""
    trie = build_trie(vocab)
    records: list[UrlRecord] = []

    # Constrained arm: lowest-cost-first over the URL automaton.
    dfa = compile_regex(config.url_regex)
    automaton = transduce(
        dfa, vocab, trie,
        terminated=config.terminated,
        deny_list=frozenset(config.deny_list),
    )
    counting = CountingScorer(scorer)
    spec = QuerySpec(
        automaton=automaton,
        top_k=config.top_k,
        topk_scope=config.topk_scope,
        max_match_tokens=config.max_match_tokens,
    )
    for i, result in enumerate(
        enumerate_shortest(spec, counting, vocab, limit=config.num_samples)
    ):
        records.append(
            UrlRecord(
                url=result.decoded.decode("utf-8", errors="replace"),
                source=CONSTRAINED_ARM,
                emission_index=i,
                emitted_at=counting.calls * config.gen_seconds_per_call,
                tokens=result.tokens,
            )
        )

    # Baseline arms: unconstrained sampling from the prompt, n-token cutoff.
    prompt_tokens = tuple(greedy_tokenize(vocab, trie, config.prompt_text.encode()))
    for arm_index, n in enumerate(config.baselines):
        counting = CountingScorer(scorer)
        rng = np.random.default_rng([config.seed, arm_index])
        arm = baseline_arm_name(n)
        for i in range(config.num_samples):
            tokens = _sample_unconstrained(
                counting, prompt_tokens, n, rng, vocab.eos_id, config.temperature
            )
            decoded = vocab.decode(tokens)
            records.append(
                UrlRecord(
                    url=config.prompt_text + decoded.decode("utf-8", errors="replace"),
                    source=arm,
                    emission_index=i,
                    emitted_at=counting.calls * config.gen_seconds_per_call,
                    tokens=prompt_tokens + tokens,
                )
            )
    return records


def _sample_unconstrained(
    scorer: Scorer,
    prompt: tuple[int, ...],
    n: int,
    rng: np.random.Generator,
    eos_id: int,
    temperature: float,
) -> tuple[int, ...]:
    """Ancestral sampling at the given temperature, stopping at EOS or n tokens."""
    tokens: tuple[int, ...] = ()
    for _ in range(n):
        logprobs = apply_temperature(scorer.next_logprobs(prompt + tokens), temperature)
        probs = np.exp(logprobs)
        pick = _weighted_pick(rng, probs.tolist(), float(probs.sum()))
        if pick == eos_id:
            break
        tokens = tokens + (pick,)
    return tokens


# --- validation -------------------------------------------------------------


@dataclass(frozen=True)
class ValidationOutcome:
    """status=None means the request timed out."""

    status: int | None
    latency_s: float
    error: str | None = None


@dataclass
class MockValidator:
    """Deterministic url -> status table with declared latencies."""

    table: dict[str, int | str]
    default: int | str = 404
    ok_latency_s: float = 0.05
    fail_latency_s: float = 0.25
    timeout_latency_s: float = 10.0

    def __call__(self, url: str) -> ValidationOutcome:
        entry = self.table.get(url, self.default)
        if entry == "timeout":
            return ValidationOutcome(status=None, latency_s=self.timeout_latency_s)
        status = int(entry)
        latency = self.ok_latency_s if status < 400 else self.fail_latency_s
        return ValidationOutcome(status=status, latency_s=latency)


@dataclass
class LiveValidator:
    """Single HTTP GET per URL; any response status counts, errors time out."""

    timeout_s: float = 10.0
    user_agent: str = "regexlm-url-validator/0.1"

    def __call__(self, url: str) -> ValidationOutcome:
        started = time.monotonic()
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                return ValidationOutcome(
                    status=resp.status, latency_s=time.monotonic() - started
                )
        except urllib.error.HTTPError as exc:
            return ValidationOutcome(
                status=exc.code, latency_s=time.monotonic() - started
            )
        except Exception as exc:  # DNS failure, refused, timeout: invalid
            return ValidationOutcome(
                status=None,
                latency_s=min(time.monotonic() - started, self.timeout_s),
                error=str(exc),
            )


@dataclass
class ValidationConfig:
    validator: Callable[[str], ValidationOutcome]
    timeout_s: float = 10.0
    max_concurrency: int = 32


def validate_urls(
    records: Sequence[UrlRecord], config: ValidationConfig
) -> list[UrlRecord]:
    """Fill status/valid/duplicate/validated_at in place (and return records).

    Each distinct url within an arm is validated exactly once; duplicates
    share the outcome. Validator calls run through a thread pool bounded at
    max_concurrency; completion times are scheduled deterministically over
    the same number of lanes.
    """
    arms: dict[str, list[UrlRecord]] = {}
    for record in records:
        arms.setdefault(record.source, []).append(record)

    for arm_records in arms.values():
        arm_records.sort(key=lambda r: (r.emitted_at, r.emission_index))
        first_of: dict[str, UrlRecord] = {}
        for record in arm_records:
            if record.url in first_of:
                record.duplicate = True
            else:
                first_of[record.url] = record
        unique_urls = list(first_of)
        with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
            outcomes = dict(zip(unique_urls, pool.map(config.validator, unique_urls)))

        # Deterministic bounded-lane schedule in first-emission order.
        lanes = [0.0] * config.max_concurrency
        heapq.heapify(lanes)
        finished: dict[str, float] = {}
        for url in unique_urls:
            outcome = outcomes[url]
            latency = min(outcome.latency_s, config.timeout_s)
            start = max(first_of[url].emitted_at, heapq.heappop(lanes))
            done = start + latency
            heapq.heappush(lanes, done)
            finished[url] = done

        for record in arm_records:
            outcome = outcomes[record.url]
            record.status = outcome.status
            record.timed_out = outcome.status is None
            record.error = outcome.error
            record.valid = outcome.status is not None and outcome.status < 400
            record.validated_at = finished[record.url]
    return list(records)


# --- reporting ---------------------------------------------------------------


@dataclass
class ArmSummary:
    arm: str
    elapsed_s: float
    unique_valid: int
    valid_with_dupes: int
    urls_per_s: float
    ratio_vs_best_baseline: float | None


@dataclass
class ThroughputReport:
    """Cumulative valid-URL curves plus per-arm rate summaries."""

    rows: list[tuple[str, float, int, int]] = field(default_factory=list)
    summaries: list[ArmSummary] = field(default_factory=list)

    CSV_HEADER = (
        "arm,elapsed_s,cumulative_valid_unique,cumulative_valid_with_dupes,"
        "urls_per_s,ratio_vs_best_baseline"
    )

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for arm, elapsed, unique, dupes in self.rows:
            lines.append(f"{arm},{elapsed:.6f},{unique},{dupes},,")
        for s in self.summaries:
            ratio = "" if s.ratio_vs_best_baseline is None else f"{s.ratio_vs_best_baseline:.6f}"
            lines.append(
                f"summary:{s.arm},{s.elapsed_s:.6f},{s.unique_valid},"
                f"{s.valid_with_dupes},{s.urls_per_s:.6f},{ratio}"
            )
        return "\n".join(lines) + "\n"

    def summary_for(self, arm: str) -> ArmSummary:
        for s in self.summaries:
            if s.arm == arm:
                return s
        raise KeyError(arm)

    def curve(self, arm: str) -> list[tuple[float, int, int]]:
        return [(e, u, d) for a, e, u, d in self.rows if a == arm]


def throughput_report(records: Sequence[UrlRecord]) -> ThroughputReport:
    """Build per-arm cumulative curves (unique and with-duplicates) and the
    valid-URLs-per-second summary with ratios against the best baseline."""
    report = ThroughputReport()
    arms: dict[str, list[UrlRecord]] = {}
    for record in records:
        arms.setdefault(record.source, []).append(record)

    finals: dict[str, tuple[float, int, int]] = {}
    for arm, arm_records in arms.items():
        validated = [r for r in arm_records if r.validated_at is not None]
        validated.sort(key=lambda r: (r.validated_at, r.emission_index))
        seen_valid: set[str] = set()
        unique = 0
        dupes = 0
        elapsed = 0.0
        for record in validated:
            elapsed = max(elapsed, record.validated_at)
            if record.valid:
                dupes += 1
                if record.url not in seen_valid:
                    seen_valid.add(record.url)
                    unique += 1
            report.rows.append((arm, record.validated_at, unique, dupes))
        for record in arm_records:
            elapsed = max(elapsed, record.emitted_at)
        finals[arm] = (elapsed, unique, dupes)

    def rate(arm: str) -> float:
        elapsed, unique, _ = finals[arm]
        return unique / elapsed if elapsed > 0 else 0.0

    baseline_rates = [rate(a) for a in finals if a != CONSTRAINED_ARM]
    best_baseline = max(baseline_rates) if baseline_rates else None
    for arm, (elapsed, unique, dupes) in finals.items():
        ratio = None
        if best_baseline is not None and best_baseline > 0:
            ratio = rate(arm) / best_baseline
        report.summaries.append(
            ArmSummary(
                arm=arm,
                elapsed_s=elapsed,
                unique_valid=unique,
                valid_with_dupes=dupes,
                urls_per_s=rate(arm),
                ratio_vs_best_baseline=ratio,
            )
        )
    return report


def duplicate_fraction(records: Sequence[UrlRecord], arm: str) -> float:
    arm_records = [r for r in records if r.source == arm]
    if not arm_records:
        return 0.0
    return sum(1 for r in arm_records if r.duplicate) / len(arm_records)


def conformance_fraction(
    records: Sequence[UrlRecord], arm: str, url_regex: str = DEFAULT_URL_REGEX
) -> float:
    """Fraction of an arm's urls that match the defining pattern."""
    dfa = compile_regex(url_regex)
    arm_records = [r for r in records if r.source == arm]
    if not arm_records:
        return 0.0
    hits = sum(1 for r in arm_records if dfa_matches(dfa, r.url.encode()))
    return hits / len(arm_records)
