"""Tokenized documents to normalized sparse bag-of-words vectors."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WEIGHTINGS = ("nbow", "tfidf")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class TokenizedDocument:
    id: str
    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True, eq=False)
class DocumentVector:
    """L1-normalized sparse weights over vocabulary indices.

    ``indices`` are sorted ascending; ``weights`` are aligned with them.
    """

    doc_id: str
    indices: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.indices)

    def as_dict(self) -> dict:
        return {int(i): float(w) for i, w in zip(self.indices, self.weights)}

    @classmethod
    def from_dict(cls, doc_id: str, entries: dict) -> "DocumentVector":
        """Build a vector from ``{index: weight}``; weights are used as given."""
        if not entries:
            raise CorpusError("document vector must have at least one entry")
        idx = np.array(sorted(entries), dtype=np.intp)
        w = np.array([entries[i] for i in idx], dtype=np.float64)
        return cls(doc_id, idx, w)


class Vocabulary:
    """Ordered word list with a reverse index."""

    def __init__(self, words: Iterable[str]):
        self.words = tuple(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise CorpusError("vocabulary words must be unique")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __iter__(self):
        return iter(self.words)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.words == other.words

    def __repr__(self):
        return f"Vocabulary({len(self)} words)"


@dataclass
class DocumentSet:
    label: str
    vectors: list
    vocab: Vocabulary

    def __post_init__(self):
        if not self.vectors:
            raise CorpusError(f"document set {self.label!r} is empty")

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]


@dataclass
class IngestStats:
    documents_read: int = 0
    documents_skipped: int = 0
    tokens_read: int = 0
    tokens_dropped: int = 0
    skipped_ids: list = field(default_factory=list)

    def merge(self, other: "IngestStats") -> "IngestStats":
        return IngestStats(
            self.documents_read + other.documents_read,
            self.documents_skipped + other.documents_skipped,
            self.tokens_read + other.tokens_read,
            self.tokens_dropped + other.tokens_dropped,
            self.skipped_ids + other.skipped_ids,
        )

    def summary(self) -> str:
        return (
            f"documents read={self.documents_read} skipped={self.documents_skipped}; "
            f"tokens read={self.tokens_read} dropped={self.tokens_dropped}"
        )


def build_vocabulary(docs: Sequence[TokenizedDocument], min_count: int = 1, store=None) -> Vocabulary:
    """Words with corpus frequency >= ``min_count`` (and present in ``store``).

    Index order follows first occurrence in ``docs``.
    """
    if not docs:
        raise CorpusError("cannot build a vocabulary from zero documents")
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    counts = Counter()
    order = []
    for doc in docs:
        for tok in doc.tokens:
            if tok not in counts:
                order.append(tok)
            counts[tok] += 1
    words = [w for w in order if counts[w] >= min_count and (store is None or w in store)]
    if not words:
        raise CorpusError(f"no words survive min_count={min_count} and the embedding filter")
    return Vocabulary(words)


def idf(vocab: Vocabulary, docs: Sequence[TokenizedDocument]) -> np.ndarray:
    """Smoothed inverse document frequency, ``ln((1+N)/(1+df)) + 1``."""
    if not docs:
        raise CorpusError("idf needs at least one document")
    df = np.zeros(len(vocab))
    for doc in docs:
        for w in set(doc.tokens):
            i = vocab.index.get(w)
            if i is not None:
                df[i] += 1
    n = len(docs)
    return np.log((1.0 + n) / (1.0 + df)) + 1.0


def vectorize(doc: TokenizedDocument, vocab: Vocabulary, weighting: str = "nbow", idf_table=None):
    """Weight one document; returns ``None`` when no token is in ``vocab``."""
    if weighting not in WEIGHTINGS:
        raise CorpusError(f"unknown weighting {weighting!r}")
    counts = Counter(vocab.index[t] for t in doc.tokens if t in vocab.index)
    if not counts:
        return None
    idx = np.array(sorted(counts), dtype=np.intp)
    w = np.array([counts[i] for i in idx], dtype=np.float64)
    if weighting == "tfidf":
        if idf_table is None or len(idf_table) != len(vocab):
            raise CorpusError("tfidf weighting needs an idf table covering the vocabulary")
        w = w * np.asarray(idf_table, dtype=np.float64)[idx]
    return DocumentVector(doc.id, idx, w / w.sum())


def vectorize_all(docs, vocab, weighting="nbow", idf_table=None):
    """Vectorize ``docs`` in order, returning ``(vectors, stats)``."""
    stats = IngestStats()
    vectors = []
    for doc in docs:
        stats.documents_read += 1
        stats.tokens_read += len(doc.tokens)
        stats.tokens_dropped += sum(1 for t in doc.tokens if t not in vocab.index)
        vec = vectorize(doc, vocab, weighting, idf_table)
        if vec is None:
            stats.documents_skipped += 1
            stats.skipped_ids.append(doc.id)
        else:
            vectors.append(vec)
    return vectors, stats


def filter_and_sample(docs, min_length: int, sample_size: int, seed: int):
    """Uniform sample without replacement among docs with >= ``min_length`` tokens.

    The sample keeps the corpus order of the chosen documents.
    """
    eligible = [d for d in docs if len(d.tokens) >= min_length]
    if sample_size > len(eligible):
        raise CorpusError(
            f"requested {sample_size} documents but only {len(eligible)} eligible "
            f"(min_length={min_length})"
        )
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(eligible), size=sample_size, replace=False))
    return [eligible[i] for i in chosen]


def read_corpus(path) -> list:
    """Read one document per line.

    Lines starting with ``{`` are parsed as JSON records with ``id`` and
    ``tokens`` (a list, or a string split on whitespace). Any other line is
    whitespace-tokenized plain text and gets its 0-based line number as id.
    Blank lines are ignored.
    """
    docs = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            if text.startswith("{"):
                try:
                    rec = json.loads(text)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}:{lineno + 1}: {exc}") from None
                tokens = rec.get("tokens")
                if isinstance(tokens, str):
                    tokens = tokens.split()
                if not isinstance(tokens, list):
                    raise CorpusError(f"{path}:{lineno + 1}: record has no 'tokens' list")
                doc_id = str(rec.get("id", lineno))
            else:
                tokens = text.split()
                doc_id = str(lineno)
            docs.append(TokenizedDocument(doc_id, [str(t) for t in tokens]))
    return docs


def write_corpus(docs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"id": d.id, "tokens": list(d.tokens)}) + "\n")


def is_normalized(vec: DocumentVector, tol: float = 1e-9) -> bool:
    return bool(np.all(vec.weights >= 0)) and math.isclose(float(vec.weights.sum()), 1.0, abs_tol=tol)
