"""Model backends: a real causal LM (via transformers) and a deterministic stub.

A backend exposes the vocabulary in the line-oriented wire format and
next-token log-probabilities for a token-id prefix. Backends must be
deterministic: identical requests yield identical vectors.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class BackendError(Exception):
    pass


class InvalidTokensError(BackendError):
    """Request tokens malformed or outside the vocabulary (HTTP 400)."""


def format_vocab_lines(entries: list[bytes], eos_id: int) -> str:
    """Wire format: header line then one {"id", "bytes_b64"} line per token."""
    lines = [json.dumps({"eos_id": eos_id, "size": len(entries)})]
    for i, entry in enumerate(entries):
        b64 = base64.b64encode(entry).decode("ascii")
        lines.append(json.dumps({"id": i, "bytes_b64": b64}))
    return "\n".join(lines) + "\n"


def log_softmax(values: np.ndarray) -> np.ndarray:
    shifted = values - np.max(values)
    return shifted - np.log(np.sum(np.exp(shifted)))


@dataclass
class StubBackend:
    """Deterministic pseudo-random logits derived from the prefix hash.

    Serves an existing vocabulary file. Useful for protocol conformance and
    load testing without model weights.
    """

    vocab_text: str
    vocab_size: int
    eos_id: int

    @classmethod
    def from_vocab_file(cls, path: str | Path) -> "StubBackend":
        text = Path(path).read_text(encoding="utf-8")
        header = json.loads(text.split("\n", 1)[0])
        return cls(
            vocab_text=text,
            vocab_size=int(header["size"]),
            eos_id=int(header["eos_id"]),
        )

    def serve_vocab(self) -> str:
        return self.vocab_text

    def logprobs(self, tokens: list[int]) -> np.ndarray:
        for t in tokens:
            if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < self.vocab_size:
                raise InvalidTokensError(f"invalid token id {t!r}")
        digest = hashlib.sha256(json.dumps(tokens).encode()).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.Generator(np.random.PCG64(seed))
        return log_softmax(rng.standard_normal(self.vocab_size))


# GPT-2's printable-unicode encoding of raw bytes; inverted to recover the
# byte string each token stands for.
def _unicode_to_bytes() -> dict[str, int]:
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return {chr(c): b for b, c in zip(bs, cs)}


class HFBackend:
    """A causal language model loaded through transformers (GPT-2 class).

    Inference is deterministic: eval mode, no sampling, no dropout. The
    request is stateless; no KV cache is reused across requests. An empty
    prefix is scored from the end-of-text token, the model's conventional
    document separator.
    """

    def __init__(self, model_name: str, device: str = "cpu") -> None:
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForCausalLM.from_pretrained(model_name)
        self.model.eval()
        self.model.to(device)
        self.device = device
        self.eos_id = int(self.tokenizer.eos_token_id)
        self.vocab_size = int(self.model.get_output_embeddings().weight.shape[0])
        self._vocab_text: str | None = None

    def serve_vocab(self) -> str:
        if self._vocab_text is None:
            table = _unicode_to_bytes()
            entries: list[bytes] = []
            for token_id in range(self.vocab_size):
                token = self.tokenizer.convert_ids_to_tokens(token_id)
                if token_id == self.eos_id or token is None:
                    entries.append(b"")
                    continue
                try:
                    entries.append(bytes(table[ch] for ch in token))
                except KeyError:
                    # Added special tokens: control-only, no byte content.
                    entries.append(b"")
            self._vocab_text = format_vocab_lines(entries, self.eos_id)
        return self._vocab_text

    def logprobs(self, tokens: list[int]) -> np.ndarray:
        for t in tokens:
            if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < self.vocab_size:
                raise InvalidTokensError(f"invalid token id {t!r}")
        torch = self._torch
        input_ids = tokens if tokens else [self.eos_id]
        with torch.no_grad():
            batch = torch.tensor([input_ids], dtype=torch.long, device=self.device)
            logits = self.model(batch).logits[0, -1, :]
            vector = torch.log_softmax(logits.double(), dim=-1).cpu().numpy()
        return vector


def build_backend(spec: str, device: str = "cpu"):
    """Backend spec strings: `stub:<vocab file>` or `hf:<model name>`."""
    kind, _, rest = spec.partition(":")
    if kind == "stub":
        if not rest:
            raise BackendError("stub backend needs a vocabulary file path")
        return StubBackend.from_vocab_file(rest)
    if kind == "hf":
        if not rest:
            raise BackendError("hf backend needs a model name, e.g. hf:gpt2")
        return HFBackend(rest, device=device)
    raise BackendError(f"unknown backend spec {spec!r}")
