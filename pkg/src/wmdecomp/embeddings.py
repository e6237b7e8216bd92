"""Word vector storage and word-to-word transport costs."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

METRICS = ("cosine", "euclidean")

# Bound on the float64 scratch array built per cost-matrix chunk.
_CHUNK_ELEMENTS = 1 << 22


class EmbeddingError(ValueError):
    """Raised for malformed vector files or invalid stores."""


class CostMatrix:
    """Dense block of pairwise costs between two lists of word indices."""

    def __init__(self, rows: np.ndarray, cols: np.ndarray, values: np.ndarray):
        self.rows = rows
        self.cols = cols
        self.values = values

    @property
    def shape(self):
        return self.values.shape

    def transpose(self) -> "CostMatrix":
        return CostMatrix(self.cols, self.rows, self.values.T)

    def __repr__(self):
        return f"CostMatrix(shape={self.values.shape})"


class EmbeddingStore:
    """Immutable vocabulary-indexed matrix of word vectors.

    Parameters
    ----------
    words : sequence of str
        One word per row of ``matrix``; must be unique.
    matrix : array_like, shape (n, d)
        Vector components, stored as float64.
    metric : {"cosine", "euclidean"}
        Distance used by :meth:`cost` and :meth:`cost_matrix`.
    """

    def __init__(self, words: Sequence[str], matrix, metric: str = "cosine"):
        if metric not in METRICS:
            raise EmbeddingError(f"unknown metric {metric!r}; expected one of {METRICS}")
        matrix = np.array(matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise EmbeddingError(f"matrix must be 2-D with n >= 1, d >= 1; got shape {matrix.shape}")
        words = tuple(words)
        if len(words) != matrix.shape[0]:
            raise EmbeddingError(f"{len(words)} words for {matrix.shape[0]} rows")
        index = {}
        for i, w in enumerate(words):
            if w in index:
                raise EmbeddingError(f"duplicate word {w!r}")
            index[w] = i
        if not np.all(np.isfinite(matrix)):
            bad = int(np.nonzero(~np.all(np.isfinite(matrix), axis=1))[0][0])
            raise EmbeddingError(f"non-finite component in vector for {words[bad]!r}")
        norms = np.sqrt(np.sum(matrix * matrix, axis=1))
        if metric == "cosine" and np.any(norms == 0.0):
            bad = int(np.nonzero(norms == 0.0)[0][0])
            raise EmbeddingError(f"zero-norm vector for {words[bad]!r} is not allowed under cosine")
        matrix.setflags(write=False)
        norms.setflags(write=False)
        self.words = words
        self.index = index
        self.matrix = matrix
        self.norms = norms
        self.metric = metric

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __repr__(self):
        return f"EmbeddingStore(n={len(self)}, d={self.dim}, metric={self.metric!r})"

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self.index[word]]

    def with_metric(self, metric: str) -> "EmbeddingStore":
        return EmbeddingStore(self.words, self.matrix, metric)

    def restrict(self, words: Iterable[str]) -> "EmbeddingStore":
        """Return a new store holding only ``words``, in the given order."""
        words = list(words)
        missing = [w for w in words if w not in self.index]
        if missing:
            raise KeyError(f"words not in store: {missing[:5]}")
        rows = [self.index[w] for w in words]
        return EmbeddingStore(words, self.matrix[rows], self.metric)

    def cost(self, i: int, j: int) -> float:
        """Distance between rows ``i`` and ``j`` under the store's metric.

        cosine: ``1 - x_i.x_j / (|x_i| |x_j|)``; euclidean: ``|x_i - x_j|``.
        """
        return float(self.cost_matrix([i], [j]).values[0, 0])

    def cost_matrix(self, src, dst, exact: bool = True) -> CostMatrix:
        """Costs from every index in ``src`` to every index in ``dst``.

        With ``exact=True`` each entry is reduced independently so that
        ``values[p, q] == cost(src[p], dst[q])`` bit for bit. ``exact=False``
        computes cosine costs through a matrix product, which is much faster
        for large blocks and agrees to a few ulps. Euclidean costs always take
        the exact path since the expanded-square form loses precision for
        nearby vectors.
        """
        src = np.asarray(src, dtype=np.intp).ravel()
        dst = np.asarray(dst, dtype=np.intp).ravel()
        if src.size == 0 or dst.size == 0:
            raise EmbeddingError("cost_matrix needs non-empty src and dst")
        n = len(self)
        if src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n:
            raise IndexError("word index out of range")
        xs, xd = self.matrix[src], self.matrix[dst]
        if self.metric == "cosine" and not exact:
            unit_s = xs / self.norms[src, None]
            unit_d = xd / self.norms[dst, None]
            values = 1.0 - unit_s @ unit_d.T
        else:
            values = np.empty((src.size, dst.size))
            step = max(1, _CHUNK_ELEMENTS // (dst.size * self.dim))
            for start in range(0, src.size, step):
                stop = min(start + step, src.size)
                a = xs[start:stop, None, :]
                if self.metric == "cosine":
                    dots = np.sum(a * xd[None, :, :], axis=-1)
                    denom = self.norms[src[start:stop], None] * self.norms[None, dst]
                    values[start:stop] = 1.0 - dots / denom
                else:
                    diff = a - xd[None, :, :]
                    values[start:stop] = np.sqrt(np.sum(diff * diff, axis=-1))
        if self.metric == "cosine":
            np.clip(values, 0.0, 2.0, out=values)
        # a word is at distance exactly 0 from itself, whatever the rounding
        values[src[:, None] == dst[None, :]] = 0.0
        values.setflags(write=False)
        return CostMatrix(src, dst, values)


def load_embeddings(path, format: str = "auto", metric: str = "cosine") -> EmbeddingStore:
    """Read whitespace-separated word vectors from a UTF-8 text file.

    Each data line is ``word c_1 ... c_d``. With ``format="text-with-header"``
    the first line must be ``n d``; ``"auto"`` treats a first line of exactly
    two integers as a header.
    """
    if format not in ("auto", "text", "text-with-header"):
        raise EmbeddingError(f"unknown embedding format {format!r}")
    path = Path(path)
    words, rows = [], []
    seen = set()
    dim = None
    header = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and format != "text":
                looks_like_header = len(parts) == 2 and all(p.isdigit() for p in parts)
                if format == "text-with-header" and not looks_like_header:
                    raise EmbeddingError(f"{path}:1: expected header 'n d', got {line.strip()!r}")
                if looks_like_header:
                    header = (int(parts[0]), int(parts[1]))
                    dim = header[1]
                    continue
            word, comps = parts[0], parts[1:]
            if dim is None:
                dim = len(comps)
                if dim < 1:
                    raise EmbeddingError(f"{path}:{lineno}: no vector components")
            if len(comps) != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dim} components, found {len(comps)}"
                )
            if word in seen:
                raise EmbeddingError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                rows.append([float(c) for c in comps])
            except ValueError as exc:
                raise EmbeddingError(f"{path}:{lineno}: {exc}") from None
            seen.add(word)
            words.append(word)
    if not words:
        raise EmbeddingError(f"{path}: no word vectors found")
    if header is not None and header[0] != len(words):
        raise EmbeddingError(f"{path}: header declares {header[0]} words, found {len(words)}")
    return EmbeddingStore(words, np.array(rows, dtype=np.float64), metric)


def save_embeddings(store: EmbeddingStore, path, header: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(store)} {store.dim}\n")
        for word, row in zip(store.words, store.matrix):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")
