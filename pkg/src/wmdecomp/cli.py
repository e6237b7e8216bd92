"""Command-line entry point: ``wmdecomp {pair,compare,clusters,diff-time}``."""

from __future__ import annotations

import argparse
import sys

from . import analysis, clustering
from .corpus import read_corpus
from .decomposition import write_word_table
from .embeddings import load_embeddings
from .pairing import gale_shapley, random_pairs, read_pairs, write_pairs
from .transport import lc_rwmd_matrix


def _log(msg):
    print(msg, file=sys.stderr)


def _add_input_args(p):
    p.add_argument("--set-a", required=True, help="corpus A (JSONL with id/tokens, or plain text lines)")
    p.add_argument("--set-b", required=True, help="corpus B")
    p.add_argument("--embeddings", required=True, help="word vectors in text format")
    p.add_argument("--embeddings-format", default="auto", choices=["auto", "text", "text-with-header"])
    p.add_argument("--metric", default="cosine", choices=["cosine", "euclidean"])
    p.add_argument("--weighting", default="nbow", choices=["nbow", "tfidf"])
    p.add_argument("--idf-scope", default="union", choices=["union", "per-set"])
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--label-a", default=None)
    p.add_argument("--label-b", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subsample", action="store_true", help="shrink the larger set to the smaller size")


def _load_sets(args):
    store = load_embeddings(args.embeddings, args.embeddings_format, args.metric)
    docs_a, docs_b = read_corpus(args.set_a), read_corpus(args.set_b)
    sa, sb, sub, st = analysis.build_sets(
        docs_a, docs_b, store, args.weighting, args.min_count, args.idf_scope,
        args.label_a or args.set_a, args.label_b or args.set_b,
    )
    _log(f"set a: {st['a'].summary()}")
    _log(f"set b: {st['b'].summary()}")
    _log(f"vocabulary: {len(sa.vocab)} words")
    return sa, sb, sub


def _direction(arg):
    return {"ab": "ab", "ba": "ba", "max": "max"}[arg]


def _reduced(store, spec, seed):
    """Coordinates for clustering ``store``'s words; returns ``(words, matrix, label)``."""
    if spec is None or spec == "none":
        return list(store.words), clustering.reduce(store, "none"), "none"
    if spec.startswith("pca:"):
        dims = int(spec.split(":", 1)[1])
        return list(store.words), clustering.reduce(store, "pca", dims, seed), spec
    if spec.startswith("file:"):
        words, coords = clustering.load_coordinates(spec.split(":", 1)[1])
        keep = [k for k, w in enumerate(words) if w in store]
        return [words[k] for k in keep], coords[keep], "file"
    raise SystemExit(f"--reduce must be none, pca:D or file:coords.csv (got {spec!r})")


def cmd_pair(args):
    sa, sb, store = _load_sets(args)
    if args.method == "gs":
        if len(sa) != len(sb):
            raise SystemExit(f"Gale-Shapley needs equal set sizes, got {len(sa)} and {len(sb)}")
        prefs = lc_rwmd_matrix(sa, sb, store, _direction(args.direction), exact=False)
        pairing = gale_shapley(prefs, args.suitor)
        pairing = type(pairing)(pairing.pairs, pairing.method, args.seed)
    else:
        count = args.count or min(len(sa), len(sb))
        pairing = random_pairs(len(sa), len(sb), count, args.seed)
    write_pairs(pairing, args.out, {"direction": args.direction, "suitor": args.suitor})
    _log(f"wrote {len(pairing)} pairs to {args.out}")


def cmd_compare(args):
    sa, sb, store = _load_sets(args)
    clusters = None
    cluster_meta = None
    if args.clusters:
        clusters = clustering.read_clusters(args.clusters)
        cluster_meta = {"source": "file"}
    elif args.kmeans:
        words, coords, label = _reduced(store, args.reduce, args.seed)
        clusters = clustering.kmeans(coords, args.kmeans, seed=args.seed, words=words, reduction=label)
        cluster_meta = {"source": "kmeans", "k": args.kmeans, "reduction": label, "inertia": clusters.inertia}
    pairing = read_pairs(args.pairs) if args.pairs else args.method
    config = analysis.ComparisonConfig(
        pairing=pairing,
        direction=_direction(args.direction),
        suitor_side=args.suitor,
        seed=args.seed,
        random_count=args.count,
        subsample=args.subsample,
        clusters=clusters,
        keywords_per_cluster=args.keywords,
        workers=args.workers,
        metric=args.metric,
        weighting=args.weighting,
        extra={"clusters": cluster_meta, "idf_scope": args.idf_scope, "min_count": args.min_count},
    )
    try:
        report = analysis.compare_sets(sa, sb, store, config)
    except analysis.ComparisonError as exc:
        raise SystemExit(f"compare failed: {exc}")
    report.write_json(args.out)
    s = report.summary
    _log(f"{s['n']} pairs, mean WMD {s['mean']:.6f}; report written to {args.out}")
    if args.word_csv:
        for key in ("ab_diff", "ba_diff"):
            path = f"{args.word_csv}_{key}.csv"
            write_word_table(report.word_tables[key], path, clusters)
    if args.hist:
        analysis.write_histogram(report.pair_distances, args.hist, args.bins)


def cmd_clusters(args):
    store = load_embeddings(args.embeddings, args.embeddings_format, args.metric)
    words, coords, label = _reduced(store, args.reduce, args.seed)
    if args.scan:
        rows = clustering.elbow_scan(coords, clustering.parse_scan(args.scan), seed=args.seed)
        out = open(args.scan_out, "w", encoding="utf-8") if args.scan_out else sys.stdout
        try:
            out.write("k,inertia,silhouette\n")
            for k, inertia, sil in rows:
                out.write(f"{k},{inertia!r},{'' if sil is None else repr(sil)}\n")
        finally:
            if out is not sys.stdout:
                out.close()
    model = clustering.kmeans(coords, args.kmeans, seed=args.seed, words=words, reduction=label)
    clustering.write_clusters(model, args.out)
    _log(f"{args.kmeans} clusters over {len(words)} words, inertia {model.inertia:.6g}; written to {args.out}")


def cmd_diff_time(args):
    r0 = analysis.ComparisonReport.read_json(args.report_t0)
    r1 = analysis.ComparisonReport.read_json(args.report_t1)
    records = analysis.cost_change(r0, r1, args.direction, differenced=not args.raw)
    ratio_b = args.min_freq_ratio if args.min_freq_ratio_b is None else args.min_freq_ratio_b
    similar = None
    if args.all:
        out = sorted(records, key=lambda r: (r.change_pct is None, r.change_pct or 0.0, r.word))
    else:
        out = analysis.assimilation_filter(records, args.min_freq_ratio, ratio_b, args.min_t0_cost)
        candidates = analysis.assimilation_filter(records, args.min_freq_ratio, ratio_b, 0.0)
        similar = analysis.similar_in_cluster(out, candidates)
    analysis.write_changes(out, args.out, similar)
    if args.hist:
        analysis.write_histogram([r.change_abs for r in records], args.hist, args.bins)
    _log(f"{len(out)} of {len(records)} words written to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(prog="wmdecomp", description="Decomposed word mover's distance between document sets")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pair", help="pair documents across two sets")
    _add_input_args(p)
    p.add_argument("--method", choices=["gs", "random"], default="gs")
    p.add_argument("--direction", choices=["ab", "ba", "max"], default="ab")
    p.add_argument("--suitor", choices=["a", "b"], default="a")
    p.add_argument("--count", type=int, default=None, help="number of random pairs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("compare", help="decompose the distance between two sets")
    _add_input_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pairs", help="pairs CSV from 'wmdecomp pair'")
    g.add_argument("--method", choices=["gs", "random"], default="gs")
    p.add_argument("--direction", choices=["ab", "ba", "max"], default="ab")
    p.add_argument("--suitor", choices=["a", "b"], default="a")
    p.add_argument("--count", type=int, default=None, help="number of random pairs")
    c = p.add_mutually_exclusive_group()
    c.add_argument("--clusters", help="word,cluster CSV")
    c.add_argument("--kmeans", type=int, help="cluster the vocabulary into K groups")
    p.add_argument("--reduce", default="none", help="none | pca:D | file:coords.csv")
    p.add_argument("--keywords", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--word-csv", help="prefix for differenced word-table CSVs")
    p.add_argument("--hist", help="write a histogram of pair distances to this CSV")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("clusters", help="cluster embedding words")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--embeddings-format", default="auto", choices=["auto", "text", "text-with-header"])
    p.add_argument("--metric", default="euclidean", choices=["cosine", "euclidean"],
                   help="only affects zero-norm validation; clustering is Euclidean")
    p.add_argument("--kmeans", type=int, default=100)
    p.add_argument("--reduce", default="none")
    p.add_argument("--scan", help="k range start:stop:step for elbow/silhouette scan")
    p.add_argument("--scan-out", help="scan CSV path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clusters)

    p = sub.add_parser("diff-time", help="per-word cost change between two reports")
    p.add_argument("--report-t0", required=True)
    p.add_argument("--report-t1", required=True)
    p.add_argument("--direction", choices=["ab", "ba"], default="ab")
    p.add_argument("--min-freq-ratio", type=float, default=0.5)
    p.add_argument("--min-freq-ratio-b", type=float, default=None, help="defaults to --min-freq-ratio")
    p.add_argument("--min-t0-cost", type=float, default=None, help="default: 90th percentile of t0 costs")
    p.add_argument("--raw", action="store_true", help="use undifferenced word tables")
    p.add_argument("--all", action="store_true", help="write every word instead of the assimilation filter")
    p.add_argument("--hist", help="write a histogram of absolute cost changes to this CSV")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diff_time)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
