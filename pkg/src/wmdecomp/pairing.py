"""Pairing documents across two sets: stable matching and a random baseline."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .transport import DistanceMatrix


class PairingError(ValueError):
    pass


@dataclass(frozen=True)
class PairingResult:
    """Pairs of ``(index in set a, index in set b)``."""

    pairs: tuple
    method: str
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def is_perfect(self) -> bool:
        n = len(self.pairs)
        rows = sorted(i for i, _ in self.pairs)
        cols = sorted(j for _, j in self.pairs)
        return rows == list(range(n)) and cols == list(range(n))


def _values(prefs):
    return prefs.values if isinstance(prefs, DistanceMatrix) else np.asarray(prefs, dtype=np.float64)


def preference_ranks(dist: np.ndarray) -> np.ndarray:
    """``ranks[i, j]`` is the position of ``j`` in row ``i``'s ascending list.

    Ties go to the lower column index.
    """
    order = np.argsort(dist, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(dist.shape[0])[:, None]
    ranks[rows, order] = np.arange(dist.shape[1])[None, :]
    return ranks


def _deferred_acceptance(suitor_dist, reviewer_dist):
    """Suitor-proposing Gale-Shapley on square matrices indexed [suitor, reviewer]."""
    n = suitor_dist.shape[0]
    proposals = np.argsort(suitor_dist, axis=1, kind="stable")
    # reviewer_rank[j, i]: how reviewer j ranks suitor i (lower is better)
    reviewer_rank = preference_ranks(reviewer_dist.T)
    next_choice = np.zeros(n, dtype=np.intp)
    holder = np.full(n, -1, dtype=np.intp)
    free = deque(range(n))
    while free:
        i = free.popleft()
        j = proposals[i, next_choice[i]]
        next_choice[i] += 1
        current = holder[j]
        if current < 0:
            holder[j] = i
        elif reviewer_rank[j, i] < reviewer_rank[j, current]:
            holder[j] = i
            free.append(current)
        else:
            free.append(i)
    match = np.empty(n, dtype=np.intp)
    match[holder] = np.arange(n)
    return match


def gale_shapley(prefs, suitor_side: str = "a", reviewer_prefs=None) -> PairingResult:
    """Stable matching where each document prefers the nearest document opposite.

    Parameters
    ----------
    prefs : DistanceMatrix or array_like, shape (n, n)
        ``prefs[p, q]`` is the distance between document ``p`` of set a and
        ``q`` of set b. Suitors rank candidates by their row (side a) or
        column (side b) in ascending order.
    suitor_side : {"a", "b"}
        Which set proposes. The result is optimal for the proposing side.
    reviewer_prefs : optional matrix, same layout as ``prefs``
        Distances used for the reviewing side's rankings. Defaults to
        ``prefs``.

    Returns
    -------
    PairingResult
        Perfect matching with pairs sorted by set-a index.
    """
    d = _values(prefs)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise PairingError(f"Gale-Shapley needs a square preference matrix, got {d.shape}")
    if not np.all(np.isfinite(d)):
        raise PairingError("preference matrix has non-finite entries")
    r = d if reviewer_prefs is None else _values(reviewer_prefs)
    if r.shape != d.shape:
        raise PairingError("reviewer preferences must match the suitor matrix shape")
    if suitor_side == "a":
        match = _deferred_acceptance(d, r)
        pairs = [(i, int(match[i])) for i in range(len(match))]
    elif suitor_side == "b":
        match = _deferred_acceptance(d.T, r.T)
        pairs = sorted((int(match[j]), j) for j in range(len(match)))
    else:
        raise PairingError(f"suitor_side must be 'a' or 'b', got {suitor_side!r}")
    return PairingResult(pairs, "gale-shapley")


def verify_stable(pairing: PairingResult, prefs, suitor_side: str = "a", reviewer_prefs=None):
    """Return the first blocking pair ``(i, j)`` in row-major order, or ``None``.

    ``(i, j)`` blocks when a-document ``i`` and b-document ``j`` are not
    matched to each other and each strictly prefers the other to its
    current partner, using the same tie-broken rankings as
    :func:`gale_shapley`.
    """
    d = _values(prefs)
    r = d if reviewer_prefs is None else _values(reviewer_prefs)
    n = d.shape[0]
    if suitor_side == "a":
        rank_a, rank_b = preference_ranks(d), preference_ranks(r.T)
    else:
        rank_a, rank_b = preference_ranks(r), preference_ranks(d.T)
    partner_a = np.empty(n, dtype=np.intp)
    partner_b = np.empty(n, dtype=np.intp)
    for i, j in pairing.pairs:
        partner_a[i] = j
        partner_b[j] = i
    rows = np.arange(n)
    # strict preference on both sides excludes the matched cells themselves
    blocking = (rank_a < rank_a[rows, partner_a][:, None]) & (rank_b.T < rank_b[rows, partner_b][None, :])
    hits = np.argwhere(blocking)
    return (int(hits[0, 0]), int(hits[0, 1])) if len(hits) else None


def random_pairs(n_a: int, n_b: int, count: int, seed: int) -> PairingResult:
    """``count`` independent uniform draws of ``(i, j)``, with replacement."""
    if count < 1:
        raise PairingError("count must be >= 1")
    if n_a < 1 or n_b < 1:
        raise PairingError("both sets need at least one document")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, n_a, size=count)
    cols = rng.integers(0, n_b, size=count)
    return PairingResult(list(zip(rows.tolist(), cols.tolist())), "random", seed)


def subsample_to_match(n_a: int, n_b: int, seed: int):
    """Index lists that shrink the larger set to the smaller size.

    Returns ``(keep_a, keep_b)``; the smaller side keeps every index.
    """
    rng = np.random.default_rng(seed)
    n = min(n_a, n_b)

    def pick(size):
        if size == n:
            return list(range(size))
        return sorted(rng.choice(size, size=n, replace=False).tolist())

    return pick(n_a), pick(n_b)


def write_pairs(pairing: PairingResult, path=None, extra=None) -> str:
    """Serialize as ``a_index,b_index`` CSV under a ``#`` metadata line."""
    buf = io.StringIO()
    meta = {"method": pairing.method, "seed": pairing.seed}
    meta.update(extra or {})
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a_index", "b_index"])
    writer.writerows(pairing.pairs)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_pairs(path) -> PairingResult:
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
        elif line.strip():
            body.append(line)
    for rec in csv.DictReader(body):
        rows.append((int(rec["a_index"]), int(rec["b_index"])))
    seed = meta.get("seed")
    seed = None if seed in (None, "None") else int(seed)
    return PairingResult(rows, meta.get("method", "file"), seed)
