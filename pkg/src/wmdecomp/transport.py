"""Exact word mover's distance by network simplex, plus relaxed lower bounds.

The exact solver works on the bipartite transportation instance built from
the unique words of one document pair. A basis is a spanning tree of
``m + n - 1`` cells over the ``m`` source and ``n`` target nodes; each pivot
prices all non-basic cells against the tree's node potentials, pushes flow
around the cycle the entering cell closes, and drops one cell that hits zero.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .embeddings import CostMatrix

DIRECTIONS = ("ab", "ba", "max")

# Weight sums may drift this far from 1 before a pair is rejected.
NORMALIZATION_TOL = 1e-6
FLOW_CLAMP = 1e-12
# Consecutive zero-step pivots tolerated before switching to Bland's rule.
MAX_DEGENERATE = 50


class TransportError(ValueError):
    pass


class SolverError(RuntimeError):
    """The pivot loop failed to terminate; ``instance`` holds the inputs."""

    def __init__(self, message, instance):
        super().__init__(message)
        self.instance = instance


@dataclass(frozen=True, eq=False)
class TransportPlan:
    src_indices: np.ndarray
    dst_indices: np.ndarray
    flows: np.ndarray
    costs: np.ndarray
    total_cost: float

    def transpose(self) -> "TransportPlan":
        """The same plan read in the opposite direction."""
        return TransportPlan(self.dst_indices, self.src_indices, self.flows.T, self.costs.T, self.total_cost)

    def word_costs(self) -> np.ndarray:
        """Cost carried out of each source word, ``sum_j flow[i, j] * c[i, j]``."""
        return np.sum(self.flows * self.costs, axis=1)


def _normalize_direction(direction):
    aliases = {"a->b": "ab", "b->a": "ba", "symmetric-max": "max", "a→b": "ab", "b→a": "ba"}
    direction = aliases.get(direction, direction)
    if direction not in DIRECTIONS:
        raise TransportError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    return direction


def _check_pair(a, b, costs: CostMatrix):
    if costs.values.shape != (len(a), len(b)):
        raise TransportError(f"cost matrix shape {costs.values.shape} does not match documents ({len(a)}, {len(b)})")
    if not (np.array_equal(costs.rows, a.indices) and np.array_equal(costs.cols, b.indices)):
        raise TransportError("cost matrix rows/cols do not match document word indices")
    for name, doc in (("source", a), ("target", b)):
        s = float(doc.weights.sum())
        if abs(s - 1.0) > NORMALIZATION_TOL or np.any(doc.weights < 0):
            raise TransportError(f"{name} document {doc.doc_id!r} is not L1-normalized (sum={s!r})")


def pair_costs(store, a, b, exact: bool = True) -> CostMatrix:
    """Cost matrix over the unique words of ``a`` (rows) and ``b`` (cols)."""
    return store.cost_matrix(a.indices, b.indices, exact=exact)


def _northwest_corner(supply, demand):
    m, n = len(supply), len(demand)
    ra, rb = supply.copy(), demand.copy()
    flows = np.zeros((m, n))
    basis = []
    i = j = 0
    while i < m and j < n:
        x = min(ra[i], rb[j])
        flows[i, j] = x
        ra[i] -= x
        rb[j] -= x
        basis.append((i, j))
        if j == n - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    return flows, basis


def _potentials(m, n, row_adj, col_adj, c):
    u = np.empty(m)
    v = np.empty(n)
    seen_r = np.zeros(m, dtype=bool)
    seen_c = np.zeros(n, dtype=bool)
    u[0] = 0.0
    seen_r[0] = True
    queue = deque([(0, 0)])  # (side, node) with side 0=row, 1=col
    while queue:
        side, k = queue.popleft()
        if side == 0:
            for j in row_adj[k]:
                if not seen_c[j]:
                    v[j] = c[k, j] - u[k]
                    seen_c[j] = True
                    queue.append((1, j))
        else:
            for i in col_adj[k]:
                if not seen_r[i]:
                    u[i] = c[i, k] - v[k]
                    seen_r[i] = True
                    queue.append((0, i))
    return u, v


def _tree_path(i0, j0, row_adj, col_adj):
    """Cells on the tree path from row ``i0`` to column ``j0``, in order."""
    parent = {(0, i0): None}
    queue = deque([(0, i0)])
    target = (1, j0)
    while queue:
        node = queue.popleft()
        if node == target:
            break
        side, k = node
        nbrs = [(1, j) for j in row_adj[k]] if side == 0 else [(0, i) for i in col_adj[k]]
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    cells = []
    node = target
    while parent[node] is not None:
        prev = parent[node]
        cells.append((prev[1], node[1]) if prev[0] == 0 else (node[1], prev[1]))
        node = prev
    cells.reverse()
    return cells


def network_simplex(supply, demand, c, max_iter=None):
    """Minimize ``sum(flows * c)`` subject to row sums ``supply`` and column sums ``demand``.

    ``supply`` and ``demand`` must have equal totals. Returns the optimal
    basic flow matrix and the number of pivots performed. Pricing is
    Dantzig's most-negative reduced cost; after ``MAX_DEGENERATE`` consecutive
    zero-length pivots the solver switches to Bland's rule (first improving
    cell, lowest-index leaving cell), which cannot cycle.
    """
    supply = np.asarray(supply, dtype=np.float64)
    demand = np.asarray(demand, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m, n = c.shape
    flows, basis = _northwest_corner(supply, demand)
    if m == 1 or n == 1:
        return flows, 0
    row_adj = [set() for _ in range(m)]
    col_adj = [set() for _ in range(n)]
    for i, j in basis:
        row_adj[i].add(j)
        col_adj[j].add(i)
    is_basic = np.zeros((m, n), dtype=bool)
    for i, j in basis:
        is_basic[i, j] = True

    scale = max(1.0, float(np.max(np.abs(c))))
    eps = 1e-12 * scale
    if max_iter is None:
        max_iter = 50 * (m + n) * max(m, n) + 1000
    bland = False
    degenerate_run = 0
    for it in range(max_iter):
        u, v = _potentials(m, n, row_adj, col_adj, c)
        reduced = c - u[:, None] - v[None, :]
        reduced[is_basic] = 0.0
        if bland:
            neg = np.flatnonzero(reduced.ravel() < -eps)
            if neg.size == 0:
                return flows, it
            ei, ej = divmod(int(neg[0]), n)
        else:
            k = int(np.argmin(reduced))
            ei, ej = divmod(k, n)
            if reduced[ei, ej] >= -eps:
                return flows, it
        path = _tree_path(ei, ej, row_adj, col_adj)
        # Along the path from row ei to column ej the last cell loses flow,
        # then signs alternate back towards ei.
        k = len(path)
        minus = [path[t] for t in range(k) if (k - 1 - t) % 2 == 0]
        plus = [path[t] for t in range(k) if (k - 1 - t) % 2 == 1]
        theta = min(flows[cell] for cell in minus)
        ties = [cell for cell in minus if flows[cell] == theta]
        leave = min(ties) if bland else ties[-1]
        for cell in plus:
            flows[cell] += theta
        for cell in minus:
            flows[cell] -= theta
        flows[ei, ej] = theta
        flows[leave] = 0.0
        is_basic[leave] = False
        is_basic[ei, ej] = True
        row_adj[leave[0]].discard(leave[1])
        col_adj[leave[1]].discard(leave[0])
        row_adj[ei].add(ej)
        col_adj[ej].add(ei)
        if theta <= 0.0:
            degenerate_run += 1
            if degenerate_run > MAX_DEGENERATE:
                bland = True
        else:
            degenerate_run = 0
    raise SolverError(
        f"network simplex did not converge within {max_iter} pivots ({m}x{n} instance)",
        {"supply": supply.tolist(), "demand": demand.tolist(), "costs": c.tolist()},
    )


def solve_transport(a, b, costs: CostMatrix) -> TransportPlan:
    """Exact word mover's distance between document vectors ``a`` and ``b``.

    Parameters
    ----------
    a, b : DocumentVector
        Source and target documents, L1-normalized.
    costs : CostMatrix
        Costs between ``a.indices`` (rows) and ``b.indices`` (columns), as
        returned by :func:`pair_costs`.

    Returns
    -------
    TransportPlan
        Optimal basic flows and their total cost.
    """
    _check_pair(a, b, costs)
    supply = a.weights.astype(np.float64)
    demand = b.weights * (supply.sum() / b.weights.sum())
    c = np.asarray(costs.values, dtype=np.float64)
    try:
        flows, _ = network_simplex(supply, demand, c)
    except SolverError as exc:
        exc.instance.update(src_doc=a.doc_id, dst_doc=b.doc_id)
        raise
    flows[flows < FLOW_CLAMP] = 0.0
    total = float(np.sum(flows * c))
    flows.setflags(write=False)
    return TransportPlan(a.indices, b.indices, flows, costs.values, total)


def rwmd(a, b, costs: CostMatrix, direction: str = "ab") -> float:
    """Relaxed WMD: every word ships all its mass to its nearest counterpart."""
    direction = _normalize_direction(direction)
    _check_pair(a, b, costs)
    c = costs.values
    ab = float(np.dot(a.weights, c.min(axis=1)))
    ba = float(np.dot(b.weights, c.min(axis=0)))
    return {"ab": ab, "ba": ba, "max": max(ab, ba)}[direction]


class DistanceMatrix:
    """Distances between every document of one set and every document of another."""

    def __init__(self, values: np.ndarray, direction: str):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise TransportError("distance matrix must be 2-D")
        if not np.all(np.isfinite(values)):
            raise TransportError("distance matrix has non-finite entries")
        self.values = values
        self.direction = direction

    @property
    def shape(self):
        return self.values.shape

    def __repr__(self):
        return f"DistanceMatrix(shape={self.values.shape}, direction={self.direction!r})"


def _one_way_lc(src_set, dst_set, store, exact):
    """``out[p, q] = rwmd(src[p] -> dst[q])`` via per-target nearest-word minima."""
    from scipy import sparse

    src_words = np.unique(np.concatenate([v.indices for v in src_set]))
    dst_words = np.unique(np.concatenate([v.indices for v in dst_set]))
    col_of = {int(w): k for k, w in enumerate(dst_words)}
    row_of = {int(w): k for k, w in enumerate(src_words)}
    cost = store.cost_matrix(src_words, dst_words, exact=exact).values
    # minima[w, q]: cost from source-side word w to the nearest word of dst[q]
    minima = np.empty((src_words.size, len(dst_set)))
    for q, doc in enumerate(dst_set):
        cols = [col_of[int(w)] for w in doc.indices]
        minima[:, q] = cost[:, cols].min(axis=1)
    rows, cols, vals = [], [], []
    for p, doc in enumerate(src_set):
        rows.extend([p] * len(doc))
        cols.extend(row_of[int(w)] for w in doc.indices)
        vals.extend(doc.weights.tolist())
    weights = sparse.csr_matrix((vals, (rows, cols)), shape=(len(src_set), src_words.size))
    return np.asarray(weights @ minima)


def lc_rwmd_matrix(sa, sb, store, direction: str = "ab", exact: bool = True) -> DistanceMatrix:
    """Relaxed WMD between all pairs of two document sets in one batched pass.

    For each target document the minimum cost from every source-side word to
    any of its words is computed once, after which each source document's
    distance is a sparse dot product of its weights with those minima.

    ``direction`` selects ``"ab"`` (rows of ``sa`` moved onto ``sb``),
    ``"ba"`` (``sb`` moved onto ``sa``, still indexed ``[p, q]`` with ``p``
    in ``sa``), or ``"max"`` of the two.
    """
    direction = _normalize_direction(direction)
    if len(sa) == 0 or len(sb) == 0:
        raise TransportError("lc_rwmd_matrix needs non-empty document sets")
    if direction == "ab":
        out = _one_way_lc(sa, sb, store, exact)
    elif direction == "ba":
        out = _one_way_lc(sb, sa, store, exact).T
    else:
        out = np.maximum(_one_way_lc(sa, sb, store, exact), _one_way_lc(sb, sa, store, exact).T)
    return DistanceMatrix(np.ascontiguousarray(out), direction)
