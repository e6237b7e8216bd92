"""
Which words make two corpora differ
===================================

Split the total distance between two sets into per-word and per-cluster
shares, then difference the two directions of movement so words that
move equally both ways cancel out.
"""

from wmdecomp import ComparisonConfig, build_sets, compare_sets, format_top_words, kmeans, reduce, top_words
from wmdecomp.decomposition import sum_identity_error
from wmdecomp.synthetic import overlapping_corpora

store, docs_a, docs_b = overlapping_corpora(seed=5, n_docs=120)
set_a, set_b, store, _ = build_sets(docs_a, docs_b, store, weighting="tfidf", label_a="A", label_b="B")

# cluster the vocabulary in a 4-D principal subspace
coords = reduce(store, "pca", 4)
model = kmeans(coords, 8, seed=5, words=store.words)

report = compare_sets(set_a, set_b, store, ComparisonConfig(clusters=model, keywords_per_cluster=4,
                                                            weighting="tfidf"))

# word shares add back up to the summed pair distances
raw = report.word_table("ab", differenced=False)
print(f"total {raw.total():.4f}, relative error {sum_identity_error(raw, report.pair_distances):.1e}")

for direction in ("ab", "ba"):
    print(f"\ntop words moving {direction} (differenced)")
    print(format_top_words(top_words(report.word_table(direction), 8)))

print("\nclusters ranked by distance moved a->b")
for row in report.cluster_tables["ab"].ranked()[:5]:
    print(f"  cluster {row.cluster}: {row.cmd:8.4f}  {', '.join(w for w, _ in row.keywords)}")
