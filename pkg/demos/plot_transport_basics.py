"""
Word mover's distance on a three-word toy space
===============================================

Two short documents, their exact transport plan and the relaxed lower
bounds that bracket it.
"""

import numpy as np

from wmdecomp import EmbeddingStore, DocumentVector, pair_costs, rwmd, solve_transport

# u and v are orthogonal, w sits halfway between them
r2 = 1 / np.sqrt(2)
store = EmbeddingStore(["u", "v", "w"], [[1.0, 0.0], [0.0, 1.0], [r2, r2]], metric="cosine")

# documents are L1-normalized weights over vocabulary indices
a = DocumentVector.from_dict("a", {0: 0.5, 1: 0.5})  # "u v"
b = DocumentVector.from_dict("b", {0: 0.5, 2: 0.5})  # "u w"

costs = pair_costs(store, a, b)
print("cost matrix (rows: a words, cols: b words)")
print(np.round(costs.values, 4))

# the exact plan keeps u in place and moves v onto w
plan = solve_transport(a, b, costs)
print("flows")
print(plan.flows)
print(f"WMD(a, b) = {plan.total_cost:.6f}")

# per-word cost, the building block of the decomposition
for word_index, cost in zip(plan.src_indices, plan.word_costs()):
    print(f"  {store.words[word_index]} carries {cost:.6f}")

# relaxed bounds drop one marginal constraint each
for direction in ("ab", "ba", "max"):
    print(f"RWMD[{direction}] = {rwmd(a, b, costs, direction):.6f}")
