"""Tokenizer vocabulary: id <-> byte-string table plus a prefix trie.

File format (line-oriented, UTF-8 JSON per line):

    {"eos_id": 6, "size": 7}
    {"id": 0, "bytes_b64": "VA=="}
    ...

Token bytes are base64-encoded because byte-level vocabularies contain
non-UTF-8 byte strings. Ids must be contiguous 0..size-1 and strictly
increasing in the file; the EOS entry must decode to empty bytes (it is a
control token, never matched against pattern bytes).
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EngineError


class VocabularyError(EngineError):
    """Malformed vocabulary file or invalid token table."""

    def __init__(self, reason: str, line: int | None = None) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")
        self.line = line
        self.reason = reason


class GapInIdsError(VocabularyError):
    pass


class MissingEosError(VocabularyError):
    pass


class UnknownTokenIdError(VocabularyError):
    def __init__(self, token_id: int) -> None:
        super().__init__(f"unknown token id {token_id}")
        self.token_id = token_id


@dataclass(frozen=True)
class Vocabulary:
    """Dense token table; index is the token id."""

    entries: tuple[bytes, ...]
    eos_id: int

    def __post_init__(self) -> None:
        if not 0 <= self.eos_id < len(self.entries):
            raise MissingEosError(
                f"eos_id {self.eos_id} outside id range 0..{len(self.entries) - 1}"
            )
        if self.entries[self.eos_id] != b"":
            raise VocabularyError("EOS entry must have empty bytes")

    @property
    def size(self) -> int:
        return len(self.entries)

    def decode(self, tokens: Iterable[int]) -> bytes:
        """Concatenate token byte strings; EOS contributes nothing."""
        out = bytearray()
        for t in tokens:
            if not 0 <= t < len(self.entries):
                raise UnknownTokenIdError(t)
            out += self.entries[t]
        return bytes(out)

    @classmethod
    def from_strings(
        cls, tokens: Sequence[str | bytes], eos_id: int | None = None
    ) -> "Vocabulary":
        """Build a vocabulary from token strings; appends EOS when eos_id is None."""
        entries = [t.encode("utf-8") if isinstance(t, str) else bytes(t) for t in tokens]
        if eos_id is None:
            entries.append(b"")
            eos_id = len(entries) - 1
        return cls(entries=tuple(entries), eos_id=eos_id)


def decode(vocab: Vocabulary, tokens: Iterable[int]) -> bytes:
    """Functional alias for Vocabulary.decode."""
    return vocab.decode(tokens)


def parse_vocabulary(text: str) -> Vocabulary:
    """Parse the line-oriented vocabulary format from a string."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise VocabularyError("empty vocabulary file", line=1)
    header = _parse_json_line(lines[0], 1)
    eos_id = _require_int(header, "eos_id", 1)
    size = _require_int(header, "size", 1)
    if size < 1:
        raise VocabularyError("size must be >= 1", line=1)
    if len(lines) - 1 != size:
        raise VocabularyError(
            f"expected {size} entry lines, found {len(lines) - 1}", line=len(lines)
        )
    entries: list[bytes] = []
    for i, raw in enumerate(lines[1:]):
        line_no = i + 2
        obj = _parse_json_line(raw, line_no)
        token_id = _require_int(obj, "id", line_no)
        if token_id != i:
            raise GapInIdsError(
                f"expected id {i}, found {token_id} (ids must be contiguous "
                "and strictly increasing)",
                line=line_no,
            )
        b64 = obj.get("bytes_b64")
        if not isinstance(b64, str):
            raise VocabularyError("missing or non-string 'bytes_b64'", line=line_no)
        try:
            entries.append(base64.b64decode(b64, validate=True))
        except (binascii.Error, ValueError) as exc:
            raise VocabularyError(f"invalid base64: {exc}", line=line_no) from exc
    if not 0 <= eos_id < size:
        raise MissingEosError(f"eos_id {eos_id} outside id range 0..{size - 1}", line=1)
    if entries[eos_id] != b"":
        raise VocabularyError("EOS entry must have empty bytes", line=eos_id + 2)
    return Vocabulary(entries=tuple(entries), eos_id=eos_id)


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Load a vocabulary file; errors carry 1-based line numbers."""
    return parse_vocabulary(Path(path).read_text(encoding="utf-8"))


def format_vocabulary(vocab: Vocabulary) -> str:
    """Serialize to the canonical file format (inverse of parse_vocabulary)."""
    lines = [json.dumps({"eos_id": vocab.eos_id, "size": vocab.size})]
    for i, entry in enumerate(vocab.entries):
        b64 = base64.b64encode(entry).decode("ascii")
        lines.append(json.dumps({"id": i, "bytes_b64": b64}))
    return "\n".join(lines) + "\n"


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    Path(path).write_text(format_vocabulary(vocab), encoding="utf-8")


def _parse_json_line(raw: str, line_no: int) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise VocabularyError(f"invalid JSON: {exc.msg}", line=line_no) from exc
    if not isinstance(obj, dict):
        raise VocabularyError("expected a JSON object", line=line_no)
    return obj


def _require_int(obj: dict, key: str, line_no: int) -> int:
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise VocabularyError(f"missing or non-integer '{key}'", line=line_no)
    return value


@dataclass
class TokenTrie:
    """Prefix trie over non-EOS token byte strings.

    children[node] maps a byte to a child node id; terminals[node] lists the
    token ids whose byte string ends exactly at that node (duplicate token
    strings put several ids in one list).
    """

    children: list[dict[int, int]] = field(default_factory=lambda: [{}])
    terminals: list[list[int]] = field(default_factory=lambda: [[]])

    ROOT = 0

    @property
    def num_nodes(self) -> int:
        return len(self.children)

    def insert(self, data: bytes, token_id: int) -> None:
        node = self.ROOT
        for b in data:
            nxt = self.children[node].get(b)
            if nxt is None:
                nxt = len(self.children)
                self.children.append({})
                self.terminals.append([])
                self.children[node][b] = nxt
            node = nxt
        self.terminals[node].append(token_id)

    def lookup(self, data: bytes) -> list[int]:
        """Token ids whose byte string equals `data` ([] when absent)."""
        node = self.ROOT
        for b in data:
            nxt = self.children[node].get(b)
            if nxt is None:
                return []
            node = nxt
        return list(self.terminals[node])


def build_trie(vocab: Vocabulary) -> TokenTrie:
    """Index every non-EOS entry; node count <= 1 + total byte length."""
    trie = TokenTrie()
    for token_id, entry in enumerate(vocab.entries):
        if token_id == vocab.eos_id:
            continue
        trie.insert(entry, token_id)
    return trie


def greedy_tokenize(vocab: Vocabulary, trie: TokenTrie, data: bytes) -> list[int]:
    """Tokenize by repeated longest prefix match (lowest id wins duplicates).

    This is how prompt text enters the engine; it is not BPE merge-rule
    tokenization, which is out of scope.
    """
    out: list[int] = []
    pos = 0
    while pos < len(data):
        node = trie.ROOT
        best: int | None = None
        best_len = 0
        depth = 0
        while pos + depth < len(data):
            node_next = trie.children[node].get(data[pos + depth])
            if node_next is None:
                break
            node = node_next
            depth += 1
            if trie.terminals[node]:
                best = min(trie.terminals[node])
                best_len = depth
        if best is None:
            raise VocabularyError(
                f"no token matches input at byte {pos} (0x{data[pos]:02x})"
            )
        out.append(best)
        pos += best_len
    return out
