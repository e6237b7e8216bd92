"""Word- and cluster-level breakdown of the distance between two document sets."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


class DecompositionError(ValueError):
    pass


_OPPOSITE = {"ab": "ba", "ba": "ab"}


@dataclass
class WordContributionTable:
    """Accumulated distance per source word for one direction of movement.

    ``contributions`` preserves first-contribution order, which is the fixed
    (pair, source word) order of accumulation. ``differenced`` marks tables
    produced by :func:`apply_difference`.
    """

    direction: str
    contributions: dict
    pair_count: int
    doc_frequency: dict = field(default_factory=dict)
    differenced: bool = False

    def total(self) -> float:
        return float(sum(self.contributions.values()))

    def __len__(self):
        return len(self.contributions)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "pair_count": self.pair_count,
            "differenced": self.differenced,
            "words": [
                {"word": w, "cost": c, "doc_frequency": self.doc_frequency.get(w, 0)}
                for w, c in self.contributions.items()
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WordContributionTable":
        return cls(
            d["direction"],
            {r["word"]: float(r["cost"]) for r in d["words"]},
            int(d["pair_count"]),
            {r["word"]: int(r["doc_frequency"]) for r in d["words"]},
            bool(d.get("differenced", False)),
        )


@dataclass
class ClusterDistance:
    cluster: int
    cmd: float
    keywords: list


@dataclass
class ClusterDistanceTable:
    direction: str
    clusters: list

    def total(self) -> float:
        return float(sum(c.cmd for c in self.clusters))

    def ranked(self, k=None):
        """Clusters by descending distance, ties by cluster id."""
        out = sorted(self.clusters, key=lambda c: (-c.cmd, c.cluster))
        return out if k is None else out[:k]

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "clusters": [
                {"cluster": c.cluster, "cmd": c.cmd, "keywords": [[w, v] for w, v in c.keywords]}
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterDistanceTable":
        return cls(
            d["direction"],
            [ClusterDistance(int(c["cluster"]), float(c["cmd"]), [(w, float(v)) for w, v in c["keywords"]])
             for c in d["clusters"]],
        )


def accumulate_word_costs(pairs, plans, direction: str, words) -> WordContributionTable:
    """Sum each source word's transport cost over all paired documents.

    Parameters
    ----------
    pairs : PairingResult or sequence of (int, int)
        Document pairs as ``(index in a, index in b)``.
    plans : sequence of TransportPlan
        One plan per pair, oriented from the direction's origin set.
    direction : {"ab", "ba"}
    words : sequence of str
        Maps vocabulary indices in the plans to words.
    """
    if direction not in _OPPOSITE:
        raise DecompositionError(f"direction must be 'ab' or 'ba', got {direction!r}")
    pairs = list(pairs)
    plans = list(plans)
    if len(pairs) != len(plans):
        raise DecompositionError(f"{len(pairs)} pairs but {len(plans)} plans")
    contributions: dict = {}
    sources: dict = {}
    for (i, j), plan in zip(pairs, plans):
        src_doc = i if direction == "ab" else j
        per_word = plan.word_costs()
        for k, idx in enumerate(plan.src_indices):
            w = words[int(idx)]
            contributions[w] = contributions.get(w, 0.0) + float(per_word[k])
            sources.setdefault(w, set()).add(src_doc)
    doc_frequency = {w: len(s) for w, s in sources.items()}
    return WordContributionTable(direction, contributions, len(pairs), doc_frequency)


def apply_difference(table_a: WordContributionTable, table_b: WordContributionTable):
    """Subtract each shared word's opposite-direction contribution.

    Words present in only one table pass through unchanged. Returns the two
    differenced tables in the input order.
    """
    if _OPPOSITE.get(table_a.direction) != table_b.direction:
        raise DecompositionError(
            f"tables must have opposite directions, got {table_a.direction!r} and {table_b.direction!r}"
        )

    def diff(x, y):
        out = {w: (c - y.contributions[w] if w in y.contributions else c) for w, c in x.contributions.items()}
        return WordContributionTable(x.direction, out, x.pair_count, dict(x.doc_frequency), True)

    return diff(table_a, table_b), diff(table_b, table_a)


def _ranked_items(contributions: dict):
    return sorted(contributions.items(), key=lambda kv: (-kv[1], kv[0]))


def top_words(table: WordContributionTable, k: int):
    """The ``k`` largest contributions, descending; ties in word order."""
    return _ranked_items(table.contributions)[:k]


def cluster_distance(table: WordContributionTable, clusters, keywords_per_cluster: int = 10) -> ClusterDistanceTable:
    """Roll word contributions up into per-cluster totals.

    ``clusters`` is a :class:`~wmdecomp.clustering.ClusterModel` or any
    mapping from word to cluster id. Every cluster id known to the model
    gets a row, including those with no contributing words.
    """
    if hasattr(clusters, "word_clusters"):
        lookup = clusters.word_clusters()
        all_ids = range(clusters.k)
    else:
        lookup = dict(clusters)
        all_ids = sorted(set(lookup.values()))
    members: dict = {c: {} for c in all_ids}
    for w, v in table.contributions.items():
        if w not in lookup:
            raise DecompositionError(f"word {w!r} has no cluster assignment")
        members.setdefault(lookup[w], {})[w] = v
    rows = []
    for cid in sorted(members):
        contribs = members[cid]
        cmd = 0.0
        for v in contribs.values():
            cmd += v
        keywords = _ranked_items(contribs)[:keywords_per_cluster]
        rows.append(ClusterDistance(int(cid), cmd, keywords))
    return ClusterDistanceTable(table.direction, rows)


def format_top_words(rows, digits: int = 2) -> str:
    """Render ``(word, cost)`` rows one per line, e.g. ``trump 45.85``."""
    return "\n".join(f"{w} {c:.{digits}f}" for w, c in rows)


def write_word_table(table: WordContributionTable, path=None, clusters=None) -> str:
    """CSV of ``word,cost[,cluster]`` ranked by descending cost."""
    lookup = clusters.word_clusters() if hasattr(clusters, "word_clusters") else clusters
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["word", "cost"] + (["cluster"] if lookup is not None else []))
    for w, c in _ranked_items(table.contributions):
        writer.writerow([w, repr(c)] + ([lookup.get(w, "")] if lookup is not None else []))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def sum_identity_error(table: WordContributionTable, pair_totals) -> float:
    """``|sum of word contributions - sum of pair distances| / sum of pair distances``."""
    total = float(np.sum(pair_totals))
    return abs(table.total() - total) / total if total > 0 else abs(table.total())
