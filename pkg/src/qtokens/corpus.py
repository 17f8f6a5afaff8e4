"""JSONL document collections: loading, sampling, sharding, tokenizing.

A corpus is an ordered sequence of documents with per-document byte and
token counts. Sampling uses a seeded per-document hash ranking so that
smaller fractions are always subsets of larger ones at the same seed.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import CorpusError

WHITESPACE = "whitespace"
BYTE = "byte"
VOCAB = "vocab"

UNKNOWN_TOKEN = "<unk>"


class Tokenizer:
    """Deterministic text-to-token mapping.

    Modes:
        whitespace: split on runs of whitespace (the default; zero assets).
        byte: one token per UTF-8 byte.
        vocab: whitespace split, then map tokens absent from an external
            vocabulary file (one token per line) to ``<unk>``.
    """

    def __init__(self, mode: str = WHITESPACE, vocab_path: str | None = None):
        if mode not in (WHITESPACE, BYTE, VOCAB):
            raise CorpusError(f"unknown tokenizer mode: {mode!r}")
        if mode == VOCAB:
            if vocab_path is None:
                raise CorpusError("vocab mode requires a vocabulary file path")
            with open(vocab_path, "r", encoding="utf-8") as fh:
                self._vocab = {line.rstrip("\n") for line in fh if line.rstrip("\n")}
        else:
            self._vocab = None
        self.mode = mode
        self.vocab_path = vocab_path

    @classmethod
    def from_spec(cls, spec: str) -> "Tokenizer":
        """Parse a CLI-style spec: ``whitespace``, ``byte`` or ``vocab:<path>``."""
        if spec.startswith("vocab:"):
            return cls(VOCAB, vocab_path=spec.split(":", 1)[1])
        return cls(spec)

    def tokenize(self, text: str) -> list[str]:
        if self.mode == WHITESPACE:
            return text.split()
        if self.mode == BYTE:
            return [chr(b) for b in text.encode("utf-8")]
        return [t if t in self._vocab else UNKNOWN_TOKEN for t in text.split()]

    def count(self, text: str) -> int:
        if self.mode == BYTE:
            return len(text.encode("utf-8"))
        return len(self.tokenize(text))


DEFAULT_TOKENIZER = Tokenizer(WHITESPACE)


@dataclass(frozen=True)
class Document:
    """One unit of UTF-8 text with its byte and token counts."""

    id: str
    text: str
    byte_len: int
    token_count: int

    @classmethod
    def create(cls, id: str, text: str, tokenizer: Tokenizer = DEFAULT_TOKENIZER) -> "Document":
        return cls(
            id=id,
            text=text,
            byte_len=len(text.encode("utf-8")),
            token_count=tokenizer.count(text),
        )


@dataclass
class Corpus:
    """Ordered sequence of documents with unique ids."""

    documents: list[Document] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    @property
    def total_tokens(self) -> int:
        return sum(doc.token_count for doc in self.documents)

    @property
    def total_bytes(self) -> int:
        return sum(doc.byte_len for doc in self.documents)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @classmethod
    def from_texts(
        cls,
        texts: Iterable[str],
        tokenizer: Tokenizer = DEFAULT_TOKENIZER,
        id_prefix: str = "doc",
    ) -> "Corpus":
        docs = [Document.create(f"{id_prefix}:{i}", t, tokenizer) for i, t in enumerate(texts)]
        return cls(docs)


def load_jsonl(path: str, tokenizer: Tokenizer = DEFAULT_TOKENIZER) -> Corpus:
    """Load a corpus from a JSONL file; one document per line.

    Each line must be a JSON object with a ``text`` string field. Missing
    ids are assigned ``<filename>:<line>``. An empty file yields an empty
    corpus; malformed lines raise with their line number.
    """
    name = os.path.basename(path)
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "text" not in obj:
                raise CorpusError(f"line {lineno}: missing field text")
            text = obj["text"]
            if not isinstance(text, str):
                raise CorpusError(f"line {lineno}: field text is not a string")
            doc_id = str(obj.get("id", f"{name}:{lineno}"))
            docs.append(Document.create(doc_id, text, tokenizer))
    return Corpus(docs)


def write_jsonl(corpus: Corpus, path: str) -> None:
    """Write a corpus as JSONL, mirroring the input format (id, text)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps({"id": doc.id, "text": doc.text}, ensure_ascii=False))
            fh.write("\n")


def _rank_hash(seed: int, doc_id: str) -> int:
    # Stable across platforms and runs, unlike builtin hash().
    digest = hashlib.blake2b(
        doc_id.encode("utf-8"), digest_size=8, key=str(seed).encode("utf-8")
    ).digest()
    return int.from_bytes(digest, "big")


def sample_fraction(corpus: Corpus, fraction: float, seed: int = 0) -> Corpus:
    """Deterministic pseudo-random subset of ceil(fraction * n) documents.

    Documents are ranked by a seeded hash of their id and the lowest-ranked
    prefix is kept, so samples nest: the 10% sample is a subset of the 50%
    sample at the same seed. Output preserves the original document order.
    """
    if not (0.0 < fraction <= 1.0):
        raise CorpusError(f"fraction must be in (0, 1], got {fraction}")
    n = len(corpus)
    take = math.ceil(fraction * n)
    if take >= n:
        return Corpus(list(corpus.documents))
    ranked = sorted(corpus.documents, key=lambda d: (_rank_hash(seed, d.id), d.id))
    keep = {d.id for d in ranked[:take]}
    return Corpus([d for d in corpus.documents if d.id in keep])


def shard(corpus: Corpus, n_shards: int) -> list[Corpus]:
    """Round-robin partition into ``n_shards`` disjoint corpora."""
    if n_shards < 1:
        raise CorpusError(f"n_shards must be >= 1, got {n_shards}")
    return [Corpus(corpus.documents[i::n_shards]) for i in range(n_shards)]


def count_tokens(corpus: Corpus, tokenizer: Tokenizer | None = None) -> int:
    """Total token count, re-tokenizing if a tokenizer is given."""
    if tokenizer is None:
        return corpus.total_tokens
    return sum(tokenizer.count(doc.text) for doc in corpus)
