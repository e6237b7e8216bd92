"""Thematic word clusters: optional PCA reduction, k-means, silhouette."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_CHUNK_ELEMENTS = 1 << 22


class ClusteringError(ValueError):
    pass


@dataclass(eq=False)
class ClusterModel:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    k: int
    seed: Optional[int] = None
    reduction: str = "none"
    words: Optional[tuple] = None
    inertia_history: list = field(default_factory=list)
    n_iter: int = 0
    converged: bool = True

    def word_clusters(self) -> dict:
        if self.words is None:
            raise ClusteringError("cluster model has no word labels")
        return {w: int(c) for w, c in zip(self.words, self.assignments)}

    def members(self, cluster: int) -> list:
        return [w for w, c in zip(self.words, self.assignments) if c == cluster]


def pca(matrix, dims: int):
    """Project onto the top ``dims`` principal axes of the centered data.

    Each axis is oriented so that its largest-magnitude loading is positive.
    Returns ``(projected, axes, variances)`` where ``axes`` has shape
    ``(dims, d)`` and ``variances`` holds all eigenvalues of the sample
    covariance in descending order.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n, d = x.shape
    if not 1 <= dims <= d:
        raise ClusteringError(f"pca dims must be in [1, {d}], got {dims}")
    centered = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[:dims].copy()
    lead = np.argmax(np.abs(axes), axis=1)
    signs = np.sign(axes[np.arange(dims), lead])
    axes *= signs[:, None]
    variances = s**2 / max(n - 1, 1)
    return centered @ axes.T, axes, variances


def reduce(store_or_matrix, method: str = "none", dims: int = 2, seed: int = 0):
    """Coordinates used for clustering.

    ``method="none"`` returns the vectors unchanged and ``"pca"`` projects
    them to ``dims`` principal components. ``seed`` is accepted for
    interface parity with stochastic reducers and is unused by both.
    """
    x = getattr(store_or_matrix, "matrix", store_or_matrix)
    x = np.asarray(x, dtype=np.float64)
    if method == "none":
        return x
    if method == "pca":
        return pca(x, dims)[0]
    raise ClusteringError(f"unknown reduction {method!r}; use 'none' or 'pca', or load coordinates from file")


def _sq_dists(x, c):
    out = np.empty((x.shape[0], c.shape[0]))
    step = max(1, _CHUNK_ELEMENTS // max(1, c.size))
    for start in range(0, x.shape[0], step):
        diff = x[start:start + step, None, :] - c[None, :, :]
        out[start:start + step] = np.sum(diff * diff, axis=-1)
    return out


def _kmeanspp(x, k, rng):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x[chosen]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rest[rng.integers(rest.size)])
        chosen.append(nxt)
        closest = np.minimum(closest, _sq_dists(x, x[[nxt]]).ravel())
    return x[chosen].copy()


def kmeans(matrix, k: int, seed: int = 0, max_iter: int = 300, words=None, reduction: str = "none") -> ClusterModel:
    """Lloyd's algorithm from k-means++ seeding.

    Stops when an assignment step changes nothing or after ``max_iter``
    assignment steps. A centroid left without members is moved onto the
    point farthest from its own centroid. ``inertia_history`` records the
    inertia after every assignment step.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise ClusteringError("kmeans expects a 2-D matrix")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ClusteringError(f"k must be in [1, {n}], got {k}")
    if words is not None and len(words) != n:
        raise ClusteringError("words must align with matrix rows")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)
    labels = None
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(x, centroids)
        new = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        if it == max_iter:
            break
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, x)
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        empty = np.flatnonzero(~nonempty)
        if empty.size:
            resid = np.sum((x - centroids[labels]) ** 2, axis=1)
            for c in empty:
                far = int(np.argmax(resid))
                centroids[c] = x[far]
                resid[far] = 0.0
    d2 = _sq_dists(x, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return ClusterModel(
        assignments=labels,
        centroids=centroids,
        inertia=inertia,
        k=k,
        seed=seed,
        reduction=reduction,
        words=None if words is None else tuple(words),
        inertia_history=history,
        n_iter=it,
        converged=converged,
    )


def silhouette_samples(matrix, labels) -> np.ndarray:
    """Per-point silhouette with Euclidean distance.

    Points alone in their cluster score 0, as do points whose intra- and
    nearest-cluster mean distances are both 0.
    """
    x = np.asarray(matrix, dtype=np.float64)
    labels = np.asarray(labels)
    ids, inv = np.unique(labels, return_inverse=True)
    if ids.size < 2:
        raise ClusteringError("silhouette needs at least two non-empty clusters")
    n = x.shape[0]
    sizes = np.bincount(inv).astype(np.float64)
    onehot = np.zeros((n, ids.size))
    onehot[np.arange(n), inv] = 1.0
    out = np.zeros(n)
    step = max(1, _CHUNK_ELEMENTS // max(1, x.size))
    for start in range(0, n, step):
        stop = min(start + step, n)
        dist = np.sqrt(_sq_dists(x[start:stop], x))
        sums = dist @ onehot
        own = inv[start:stop]
        rows = np.arange(stop - start)
        own_size = sizes[own]
        a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
        means = sums / sizes[None, :]
        means[rows, own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
        s[own_size <= 1] = 0.0
        out[start:stop] = s
    return out


def silhouette(matrix, model) -> float:
    """Mean silhouette score of a fitted model (or a label array)."""
    labels = getattr(model, "assignments", model)
    k = getattr(model, "k", None)
    if k is not None and k < 2:
        raise ClusteringError("silhouette is undefined for k < 2")
    return float(np.mean(silhouette_samples(matrix, labels)))


def derived_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


def elbow_scan(matrix, k_values, seed: int = 0, max_iter: int = 300):
    """Fit one model per ``k`` and report ``(k, inertia, silhouette)`` rows.

    Silhouette is ``None`` for ``k < 2``.
    """
    k_values = list(k_values)
    if k_values != sorted(k_values):
        raise ClusteringError("k_values must be sorted ascending")
    rows = []
    for k in k_values:
        model = kmeans(matrix, k, seed=derived_seed(seed, k), max_iter=max_iter)
        sil = silhouette(matrix, model) if k >= 2 else None
        rows.append((k, model.inertia, sil))
    return rows


def parse_scan(spec: str):
    """``"10:200:10"`` -> ``[10, 20, ..., 200]`` (stop inclusive)."""
    parts = [int(p) for p in spec.split(":")]
    if len(parts) == 2:
        parts.append(1)
    if len(parts) != 3 or parts[2] < 1:
        raise ClusteringError(f"bad scan range {spec!r}; expected start:stop[:step]")
    start, stop, step = parts
    return list(range(start, stop + 1, step))


def load_coordinates(path):
    """Read ``word,x_1,...,x_d`` rows; a header row starting with ``word`` is skipped."""
    words, rows = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            if lineno == 1 and rec[0] == "word":
                continue
            try:
                rows.append([float(v) for v in rec[1:]])
            except ValueError:
                raise ClusteringError(f"{path}:{lineno}: non-numeric coordinate") from None
            words.append(rec[0])
    if not rows:
        raise ClusteringError(f"{path}: no coordinates")
    if len({len(r) for r in rows}) != 1:
        raise ClusteringError(f"{path}: rows have differing dimensionality")
    return words, np.array(rows)


def write_clusters(model: ClusterModel, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["word", "cluster"])
    for w, c in zip(model.words, model.assignments):
        writer.writerow([w, int(c)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_clusters(path) -> dict:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            out[rec["word"]] = int(rec["cluster"])
    return out
