"""Next-token log-probability sources.

Every scorer maps a token-id prefix to a log-probability vector over the full
vocabulary (natural log, float64, logsumexp = 0 within 1e-6) and must be
deterministic and safe for concurrent read-only queries.
"""

from __future__ import annotations

import json
import math
import threading
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EngineError
from .vocab import Vocabulary, parse_vocabulary

NORMALIZATION_TOL = 1e-6
REMOTE_DRIFT_TOL = 1e-3


class ScorerError(EngineError):
    pass


class TransportError(ScorerError):
    pass


class ShapeMismatchError(ScorerError):
    pass


class NormalizationError(ScorerError):
    pass


def logsumexp(logprobs: np.ndarray) -> float:
    m = float(np.max(logprobs))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(logprobs - m))))


def uniform_logprobs(vocab_size: int) -> np.ndarray:
    """Vector with every entry -ln(vocab_size)."""
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    return np.full(vocab_size, -math.log(vocab_size), dtype=np.float64)


def apply_temperature(logprobs: np.ndarray, temperature: float) -> np.ndarray:
    """Rescale by 1/temperature and renormalize; temperature 1.0 is identity."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    if temperature == 1.0:
        return logprobs
    scaled = logprobs / temperature
    return scaled - logsumexp(scaled)


def top_k_set(logprobs: np.ndarray, k: int) -> set[int]:
    """Ids of the min(k, |V|) highest logprobs; ties broken by lower id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(logprobs)
    if k >= n:
        return set(range(n))
    # Primary key: descending logprob; secondary: ascending id.
    order = np.lexsort((np.arange(n), -logprobs))
    return set(int(i) for i in order[:k])


@dataclass(frozen=True)
class TopKFilter:
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def __call__(self, logprobs: np.ndarray) -> set[int]:
        return top_k_set(logprobs, self.k)


class Scorer(ABC):
    """Abstract next-token conditional log-probability source."""

    vocab_size: int

    @abstractmethod
    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        """Log-distribution over the next token given the full prefix."""


class UniformScorer(Scorer):
    def __init__(self, vocab_size: int) -> None:
        self.vocab_size = vocab_size
        self._vector = uniform_logprobs(vocab_size)

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        return self._vector


class CountingScorer(Scorer):
    """Wrapper that counts next_logprobs calls (drives simulated timing)."""

    def __init__(self, inner: Scorer) -> None:
        self.inner = inner
        self.vocab_size = inner.vocab_size
        self.calls = 0

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        self.calls += 1
        return self.inner.next_logprobs(prefix)


_BEGIN = -1  # context padding marker, never a real token id


class NGramModel(Scorer):
    """Additively smoothed n-gram model.

    p(t | ctx) = (count(ctx, t) + alpha) / (total(ctx) + alpha * |V|), with
    contexts shorter than order-1 left-padded by a reserved begin marker.
    """

    def __init__(self, order: int, alpha: float, vocab_size: int) -> None:
        if order < 1:
            raise ValueError("order must be >= 1")
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        self.order = order
        self.alpha = alpha
        self.vocab_size = vocab_size
        self.counts: dict[tuple[int, ...], dict[int, int]] = {}
        self.totals: dict[tuple[int, ...], int] = {}

    def _context(self, prefix: Sequence[int]) -> tuple[int, ...]:
        need = self.order - 1
        ctx = tuple(prefix[-need:]) if need else ()
        if len(ctx) < need:
            ctx = (_BEGIN,) * (need - len(ctx)) + ctx
        return ctx

    def observe(self, sequence: Sequence[int]) -> None:
        for i, tok in enumerate(sequence):
            if not 0 <= tok < self.vocab_size:
                raise ValueError(f"token {tok} outside vocabulary of {self.vocab_size}")
            ctx = self._context(sequence[:i])
            bucket = self.counts.setdefault(ctx, {})
            bucket[tok] = bucket.get(tok, 0) + 1
            self.totals[ctx] = self.totals.get(ctx, 0) + 1

    def probability(self, context: Sequence[int], token: int) -> float:
        ctx = self._context(context)
        count = self.counts.get(ctx, {}).get(token, 0)
        total = self.totals.get(ctx, 0)
        return (count + self.alpha) / (total + self.alpha * self.vocab_size)

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        ctx = self._context(prefix)
        total = self.totals.get(ctx, 0)
        denom = math.log(total + self.alpha * self.vocab_size)
        vec = np.full(self.vocab_size, math.log(self.alpha) - denom, dtype=np.float64)
        for tok, count in self.counts.get(ctx, {}).items():
            vec[tok] = math.log(count + self.alpha) - denom
        return vec


def train_ngram(
    corpus: Iterable[Sequence[int]], order: int, alpha: float, vocab_size: int
) -> NGramModel:
    """Count-based training; an empty corpus yields the pure-smoothing model."""
    model = NGramModel(order=order, alpha=alpha, vocab_size=vocab_size)
    for sequence in corpus:
        model.observe(sequence)
    return model


class FixtureScorer(Scorer):
    """Explicit prefix -> logprob-vector table with a default for the rest.

    Used to stage worked examples with hand-chosen probabilities. Every
    stored vector (and the default) must be normalized within 1e-6.
    """

    def __init__(
        self,
        vocab_size: int,
        table: dict[tuple[int, ...], Sequence[float]] | None = None,
        default: Sequence[float] | None = None,
    ) -> None:
        self.vocab_size = vocab_size
        self.default = (
            uniform_logprobs(vocab_size)
            if default is None
            else self._validated(np.asarray(default, dtype=np.float64))
        )
        self.table: dict[tuple[int, ...], np.ndarray] = {}
        for prefix, vec in (table or {}).items():
            self.set(prefix, vec)

    def set(self, prefix: Sequence[int], logprobs: Sequence[float]) -> None:
        self.table[tuple(prefix)] = self._validated(
            np.asarray(logprobs, dtype=np.float64)
        )

    def set_probs(self, prefix: Sequence[int], probs: Sequence[float]) -> None:
        """Convenience: store a probability vector (log taken here)."""
        with np.errstate(divide="ignore"):
            self.set(prefix, np.log(np.asarray(probs, dtype=np.float64)))

    def _validated(self, vec: np.ndarray) -> np.ndarray:
        if vec.shape != (self.vocab_size,):
            raise ShapeMismatchError(
                f"expected vector of length {self.vocab_size}, got {vec.shape}"
            )
        lse = logsumexp(vec)
        if abs(lse) > NORMALIZATION_TOL:
            raise NormalizationError(f"vector not normalized (logsumexp={lse:.3g})")
        return vec

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        return self.table.get(tuple(prefix), self.default)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureScorer":
        """Load from JSON: {"vocab_size": N, "default_logprobs": [...] | null,
        "entries": [{"prefix": [...], "logprobs": [...]}, ...]}."""
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        scorer = cls(
            vocab_size=int(obj["vocab_size"]), default=obj.get("default_logprobs")
        )
        for entry in obj.get("entries", []):
            scorer.set(tuple(entry["prefix"]), entry["logprobs"])
        return scorer


class RemoteScorer(Scorer):
    """Client for the HTTP wire protocol.

    GET /v1/vocab returns the vocabulary file format; POST /v1/logprobs with
    {"tokens": [...]} returns {"logprobs": [... x |V|]}. Vectors with
    logsumexp drift within 1e-3 are renormalized locally (JSON transport
    loses a little precision); larger drift is an error.
    """

    def __init__(self, endpoint: str, timeout_s: float = 30.0) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_s
        self._lock = threading.Lock()
        self._vocab: Vocabulary | None = None
        self.vocab_size = self.vocabulary().size

    def vocabulary(self) -> Vocabulary:
        with self._lock:
            if self._vocab is None:
                body = self._get("/v1/vocab")
                self._vocab = parse_vocabulary(body.decode("utf-8"))
            return self._vocab

    def next_logprobs(self, prefix: Sequence[int]) -> np.ndarray:
        payload = json.dumps({"tokens": [int(t) for t in prefix]}).encode("utf-8")
        body = self._post("/v1/logprobs", payload)
        try:
            obj = json.loads(body)
            raw = obj["logprobs"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed response body: {exc}") from exc
        vec = np.asarray(raw, dtype=np.float64)
        if vec.shape != (self.vocab_size,):
            raise ShapeMismatchError(
                f"expected {self.vocab_size} logprobs, got {vec.shape}"
            )
        lse = logsumexp(vec)
        if abs(lse) > REMOTE_DRIFT_TOL:
            raise NormalizationError(
                f"remote vector drifted beyond tolerance (logsumexp={lse:.3g})"
            )
        if lse != 0.0:
            vec = vec - lse
        return vec

    def _get(self, path: str) -> bytes:
        return self._request(urllib.request.Request(self.endpoint + path))

    def _post(self, path: str, payload: bytes) -> bytes:
        req = urllib.request.Request(
            self.endpoint + path,
            data=payload,
            headers={"Content-Type": "application/json"},
        )
        return self._request(req)

    def _request(self, req: urllib.request.Request) -> bytes:
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                return resp.read()
        except urllib.error.HTTPError as exc:
            raise TransportError(f"HTTP {exc.code} from {req.full_url}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"request to {req.full_url} failed: {exc}") from exc


def remote_next_logprobs(endpoint: str, prefix: Sequence[int]) -> np.ndarray:
    """One-shot remote query (constructs a RemoteScorer per call)."""
    return RemoteScorer(endpoint).next_logprobs(prefix)
