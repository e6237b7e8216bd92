"""
Tracking word costs across two time slices
==========================================

Compare the same pair of communities at two points in time and list the
words whose cost of moving fell while both sides kept using them.
"""

import numpy as np

from wmdecomp import ComparisonConfig, build_sets, compare_sets
from wmdecomp.analysis import assimilation_filter, cost_change, welch_t_test
from wmdecomp.synthetic import topic_corpus, topic_embeddings

rng = np.random.default_rng(42)
store, topics = topic_embeddings(rng, n_topics=6, dim=12)

# at t0 the communities talk about disjoint topics, at t1 set B drifts towards A
mix_a = [4, 4, 1, 0.2, 0.2, 0.2]
mix_b_t0 = [0.2, 0.2, 1, 4, 4, 4]
mix_b_t1 = [2, 2, 1, 3, 3, 3]

reports = []
for mix_b in (mix_b_t0, mix_b_t1):
    docs_a = topic_corpus(rng, topics, 80, mix_a, prefix="a")
    docs_b = topic_corpus(rng, topics, 80, mix_b, prefix="b")
    sa, sb, sub, _ = build_sets(docs_a, docs_b, store, label_a="A", label_b="B")
    reports.append(compare_sets(sa, sb, sub, ComparisonConfig(pairing="random", seed=1)))

t0, t1 = reports
t, dof, p = welch_t_test(t0.pair_distances, t1.pair_distances)
print(f"mean distance {t0.summary['mean']:.4f} -> {t1.summary['mean']:.4f}  (Welch t={t:.2f}, dof={dof:.1f}, p={p:.2g})")

records = cost_change(t0, t1, "ab")
for r in assimilation_filter(records, min_t0_cost=0.0)[:10]:
    print(r.format_row())
