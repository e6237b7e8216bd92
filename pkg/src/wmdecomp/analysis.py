"""End-to-end set comparison, report schema, and longitudinal statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .corpus import DocumentSet, build_vocabulary, idf, vectorize_all
from .decomposition import (
    ClusterDistanceTable,
    WordContributionTable,
    accumulate_word_costs,
    apply_difference,
    cluster_distance,
)
from .pairing import PairingResult, gale_shapley, random_pairs, subsample_to_match
from .transport import lc_rwmd_matrix, pair_costs, solve_transport

SCHEMA_VERSION = 1


class ComparisonError(RuntimeError):
    pass


@contextmanager
def _stage(name):
    try:
        yield
    except ComparisonError:
        raise
    except Exception as exc:
        raise ComparisonError(f"[{name}] {exc}") from exc


@dataclass
class ComparisonConfig:
    """Options for :func:`compare_sets`.

    ``pairing`` is ``"gs"``, ``"random"``, or a precomputed
    :class:`PairingResult`. ``direction`` selects which relaxed distance
    feeds the stable-matching preferences.
    """

    pairing: object = "gs"
    direction: str = "ab"
    suitor_side: str = "a"
    seed: int = 0
    random_count: Optional[int] = None
    subsample: bool = False
    clusters: object = None
    keywords_per_cluster: int = 10
    workers: int = 1
    metric: Optional[str] = None
    weighting: str = "nbow"
    extra: dict = field(default_factory=dict)


@dataclass
class ComparisonReport:
    metadata: dict
    pairs: list
    summary: dict
    word_tables: dict
    cluster_tables: dict
    word_clusters: Optional[dict] = None

    @property
    def pair_distances(self) -> list:
        return [p["wmd"] for p in self.pairs]

    def word_table(self, direction: str, differenced: bool = True) -> WordContributionTable:
        return self.word_tables[direction + ("_diff" if differenced else "")]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "summary": self.summary,
            "pairs": self.pairs,
            "word_tables": {k: t.to_dict() for k, t in self.word_tables.items()},
            "cluster_tables": {k: t.to_dict() for k, t in self.cluster_tables.items()},
            "word_clusters": self.word_clusters,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False, allow_nan=False) + "\n"

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ComparisonError(f"unsupported report schema_version {version!r}")
        return cls(
            d["metadata"],
            d["pairs"],
            d["summary"],
            {k: WordContributionTable.from_dict(t) for k, t in d["word_tables"].items()},
            {k: ClusterDistanceTable.from_dict(t) for k, t in d["cluster_tables"].items()},
            d.get("word_clusters"),
        )

    @classmethod
    def read_json(cls, path) -> "ComparisonReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def summarize(values) -> dict:
    x = np.asarray(values, dtype=np.float64)
    n = int(x.size)
    mean = float(math.fsum(x.tolist()) / n) if n else None
    sd = float(np.std(x, ddof=1)) if n > 1 else None
    return {"n": n, "mean": mean, "sd": sd}


def build_sets(docs_a, docs_b, store, weighting="nbow", min_count=1, idf_scope="union",
               label_a="a", label_b="b"):
    """Vectorize two tokenized corpora over one shared vocabulary.

    Returns ``(set_a, set_b, restricted_store, stats)`` where the restricted
    store's rows follow the vocabulary order. ``idf_scope`` is ``"union"``
    (idf over both corpora) or ``"per-set"``.
    """
    vocab = build_vocabulary(list(docs_a) + list(docs_b), min_count=min_count, store=store)
    sub = store.restrict(vocab.words)
    idf_a = idf_b = None
    if weighting == "tfidf":
        if idf_scope == "union":
            idf_a = idf_b = idf(vocab, list(docs_a) + list(docs_b))
        elif idf_scope == "per-set":
            idf_a, idf_b = idf(vocab, docs_a), idf(vocab, docs_b)
        else:
            raise ValueError(f"unknown idf scope {idf_scope!r}")
    va, st_a = vectorize_all(docs_a, vocab, weighting, idf_a)
    vb, st_b = vectorize_all(docs_b, vocab, weighting, idf_b)
    return (
        DocumentSet(label_a, va, vocab),
        DocumentSet(label_b, vb, vocab),
        sub,
        {"a": st_a, "b": st_b},
    )


_worker_state = {}


def _init_worker(store, va, vb):
    _worker_state.update(store=store, va=va, vb=vb)


def _solve_chunk(chunk):
    s = _worker_state
    return [solve_transport(s["va"][i], s["vb"][j], pair_costs(s["store"], s["va"][i], s["vb"][j])) for i, j in chunk]


def solve_pairs(pairs, sa, sb, store, workers: int = 1) -> list:
    """Exact transport plan (a -> b) for every pair, in pair order."""
    pairs = list(pairs)
    if workers <= 1 or len(pairs) < 2 * workers:
        return [solve_transport(sa[i], sb[j], pair_costs(store, sa[i], sb[j])) for i, j in pairs]
    size = max(1, len(pairs) // (4 * workers))
    chunks = [pairs[k:k + size] for k in range(0, len(pairs), size)]
    with ProcessPoolExecutor(workers, initializer=_init_worker,
                             initargs=(store, list(sa.vectors), list(sb.vectors))) as pool:
        return [plan for part in pool.map(_solve_chunk, chunks) for plan in part]


def compare_sets(sa: DocumentSet, sb: DocumentSet, store, config: ComparisonConfig = None) -> ComparisonReport:
    """Pair two document sets, solve each pair exactly, and decompose the distance.

    Stages: relaxed distances between all documents, pairing, exact
    transport per pair, word tables in both directions, cross-direction
    differencing, and (if ``config.clusters`` is set) cluster totals on the
    differenced tables.
    """
    config = config or ComparisonConfig()
    if sa.vocab != sb.vocab:
        raise ComparisonError("[input] document sets must share one vocabulary")
    keep_a, keep_b = list(range(len(sa))), list(range(len(sb)))
    pairing = config.pairing
    if isinstance(pairing, PairingResult):
        pass
    elif pairing in ("gs", "gale-shapley"):
        if len(sa) != len(sb):
            if not config.subsample:
                raise ComparisonError(
                    f"[pairing] Gale-Shapley needs equal set sizes, got {len(sa)} and {len(sb)}; "
                    "enable subsampling"
                )
            keep_a, keep_b = subsample_to_match(len(sa), len(sb), config.seed)
        sub_a = DocumentSet(sa.label, [sa[i] for i in keep_a], sa.vocab)
        sub_b = DocumentSet(sb.label, [sb[j] for j in keep_b], sb.vocab)
        with _stage("lc-rwmd"):
            prefs = lc_rwmd_matrix(sub_a, sub_b, store, config.direction, exact=False)
        with _stage("pairing"):
            local = gale_shapley(prefs, config.suitor_side)
        pairing = PairingResult([(keep_a[i], keep_b[j]) for i, j in local.pairs], local.method, config.seed)
    elif pairing == "random":
        count = config.random_count or min(len(sa), len(sb))
        with _stage("pairing"):
            pairing = random_pairs(len(sa), len(sb), count, config.seed)
    else:
        raise ComparisonError(f"[pairing] unknown pairing method {pairing!r}")
    for i, j in pairing.pairs:
        if not (0 <= i < len(sa) and 0 <= j < len(sb)):
            raise ComparisonError(f"[pairing] pair ({i}, {j}) out of range for sets of size {len(sa)}, {len(sb)}")

    with _stage("transport"):
        plans = solve_pairs(pairing.pairs, sa, sb, store, config.workers)
    words = sa.vocab.words
    with _stage("decomposition"):
        ab = accumulate_word_costs(pairing.pairs, plans, "ab", words)
        ba = accumulate_word_costs(pairing.pairs, [p.transpose() for p in plans], "ba", words)
        ab_d, ba_d = apply_difference(ab, ba)
    word_tables = {"ab": ab, "ba": ba, "ab_diff": ab_d, "ba_diff": ba_d}
    cluster_tables = {}
    word_clusters = None
    if config.clusters is not None:
        lookup = config.clusters.word_clusters() if hasattr(config.clusters, "word_clusters") else dict(config.clusters)
        with _stage("clusters"):
            cluster_tables = {
                "ab": cluster_distance(ab_d, config.clusters, config.keywords_per_cluster),
                "ba": cluster_distance(ba_d, config.clusters, config.keywords_per_cluster),
            }
        word_clusters = {w: lookup[w] for w in words if w in lookup}

    pair_rows = [
        {"a": i, "b": j, "a_id": sa[i].doc_id, "b_id": sb[j].doc_id, "wmd": p.total_cost}
        for (i, j), p in zip(pairing.pairs, plans)
    ]
    metadata = {
        "metric": config.metric or store.metric,
        "weighting": config.weighting,
        "pairing_method": pairing.method,
        "direction": config.direction,
        "suitor_side": config.suitor_side,
        "seed": config.seed,
        "label_a": sa.label,
        "label_b": sb.label,
        "n_a": len(sa),
        "n_b": len(sb),
        "keywords_per_cluster": config.keywords_per_cluster,
    }
    metadata.update(config.extra)
    return ComparisonReport(
        metadata, pair_rows, summarize([r["wmd"] for r in pair_rows]), word_tables, cluster_tables, word_clusters
    )


def welch_t_test(x, y):
    """Two-sided Welch t-test; returns ``(t, dof, p)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ValueError("each sample needs at least two values")
    vx = x.var(ddof=1) / x.size
    vy = y.var(ddof=1) / y.size
    se2 = vx + vy
    if se2 == 0:
        raise ValueError("both samples have zero variance")
    t = (x.mean() - y.mean()) / math.sqrt(se2)
    dof = se2**2 / (vx**2 / (x.size - 1) + vy**2 / (y.size - 1))
    p = 2.0 * stats.t.sf(abs(t), dof)
    return float(t), float(dof), float(p)


@dataclass
class CostChangeRecord:
    word: str
    cost_t0: float
    cost_t1: float
    change_abs: float
    change_pct: Optional[float]
    freq_ratio_a: Optional[float]
    freq_ratio_b: Optional[float]
    cluster: Optional[int] = None

    def format_row(self) -> str:
        pct = "null" if self.change_pct is None else f"{self.change_pct:.1f}"
        return f"{self.word} {pct}"


def _ratio(t1, t0):
    return None if t0 == 0 else t1 / t0


def cost_change(report_t0: ComparisonReport, report_t1: ComparisonReport, direction: str = "ab",
                differenced: bool = True) -> list:
    """Per-word change in contributed distance from one period to the next.

    Words missing from a period's table count as cost 0 and frequency 0.
    Frequency ratios are document-frequency ratios (t1 / t0) on each side,
    ``None`` when the word was absent at t0.
    """
    if direction not in ("ab", "ba"):
        raise ValueError("direction must be 'ab' or 'ba'")
    m0, m1 = report_t0.metadata, report_t1.metadata
    for key in ("metric", "weighting"):
        if m0.get(key) != m1.get(key):
            raise ComparisonError(f"reports differ in {key}: {m0.get(key)!r} vs {m1.get(key)!r}")
    la0, lb0, la1, lb1 = m0.get("label_a"), m0.get("label_b"), m1.get("label_a"), m1.get("label_b")
    if la0 != lb0 and la0 == lb1 and lb0 == la1:
        raise ComparisonError("reports have opposite set orientation")
    t0, t1 = report_t0.word_table(direction, differenced), report_t1.word_table(direction, differenced)
    df = {
        side: (report_t0.word_table(side, False).doc_frequency, report_t1.word_table(side, False).doc_frequency)
        for side in ("ab", "ba")
    }
    clusters = report_t1.word_clusters or report_t0.word_clusters or {}
    words = list(t0.contributions)
    words += [w for w in t1.contributions if w not in t0.contributions]
    out = []
    for w in words:
        c0 = t0.contributions.get(w, 0.0)
        c1 = t1.contributions.get(w, 0.0)
        pct = 100.0 * (c1 - c0) / c0 if c0 > 0 else None
        out.append(CostChangeRecord(
            w, c0, c1, c1 - c0, pct,
            _ratio(df["ab"][1].get(w, 0), df["ab"][0].get(w, 0)),
            _ratio(df["ba"][1].get(w, 0), df["ba"][0].get(w, 0)),
            clusters.get(w),
        ))
    return out


def assimilation_filter(records, min_freq_ratio_a: float = 0.5, min_freq_ratio_b: float = 0.5,
                        min_t0_cost: Optional[float] = None) -> list:
    """Words whose contributed distance fell while staying in use on both sides.

    Keeps records with a negative ``change_pct``, both frequency ratios at or
    above their thresholds, and ``cost_t0 >= min_t0_cost``. When
    ``min_t0_cost`` is None it defaults to the 90th percentile of ``cost_t0``
    over ``records``. Output is sorted by ``change_pct`` ascending.
    """
    records = list(records)
    if min(min_freq_ratio_a, min_freq_ratio_b) < 0:
        raise ValueError("thresholds must be non-negative")
    if min_t0_cost is None:
        min_t0_cost = float(np.percentile([r.cost_t0 for r in records], 90)) if records else 0.0
    kept = [
        r for r in records
        if r.change_pct is not None and r.change_pct < 0
        and r.freq_ratio_a is not None and r.freq_ratio_a >= min_freq_ratio_a
        and r.freq_ratio_b is not None and r.freq_ratio_b >= min_freq_ratio_b
        and r.cost_t0 >= min_t0_cost
    ]
    return sorted(kept, key=lambda r: (r.change_pct, r.word))


def similar_in_cluster(targets, candidates, limit: int = 3) -> dict:
    """For each target word, other candidate words from its cluster, most-reduced first."""
    by_cluster = {}
    for r in sorted(candidates, key=lambda r: (r.change_pct, r.word)):
        if r.cluster is not None:
            by_cluster.setdefault(r.cluster, []).append(r.word)
    return {
        r.word: [w for w in by_cluster.get(r.cluster, []) if w != r.word][:limit]
        for r in targets
    }


def write_changes(records, path=None, similar=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["word", "cost_t0", "cost_t1", "change_abs", "change_pct", "freq_ratio_a", "freq_ratio_b", "cluster"]
    if similar is not None:
        header.append("similar_words")
    writer.writerow(header)

    def cell(v):
        return "" if v is None else repr(v)

    for r in records:
        row = [r.word, cell(r.cost_t0), cell(r.cost_t1), cell(r.change_abs), cell(r.change_pct),
               cell(r.freq_ratio_a), cell(r.freq_ratio_b), "" if r.cluster is None else r.cluster]
        if similar is not None:
            row.append(" ".join(similar.get(r.word, [])))
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def histogram(values, bins: int = 30):
    """Binned counts; returns ``(edges, counts)``."""
    counts, edges = np.histogram(np.asarray(values, dtype=np.float64), bins=bins)
    return edges, counts


def write_histogram(values, path=None, bins: int = 30) -> str:
    edges, counts = histogram(values, bins)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_left", "bin_right", "count"])
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        writer.writerow([repr(float(lo)), repr(float(hi)), int(c)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
