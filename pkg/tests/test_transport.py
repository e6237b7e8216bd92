import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C45, dv
from oracles import transport_lp, transport_vertices
from wmdecomp.corpus import DocumentSet, DocumentVector, Vocabulary
from wmdecomp.embeddings import EmbeddingStore
from wmdecomp.synthetic import random_document_pair, unit_sphere
from wmdecomp.transport import (
    SolverError,
    TransportError,
    lc_rwmd_matrix,
    network_simplex,
    pair_costs,
    rwmd,
    solve_transport,
)


def solve(store, a, b):
    return solve_transport(a, b, pair_costs(store, a, b))


class TestSolveExamples:
    def test_single_word_forced(self, uvw):
        plan = solve(uvw, dv({0: 1.0}), dv({1: 1.0}))
        np.testing.assert_array_equal(plan.flows, [[1.0]])
        assert plan.total_cost == pytest.approx(1.0, abs=1e-15)

    def test_identity_is_free(self, uvw):
        a = dv({0: 0.2, 1: 0.3, 2: 0.5})
        assert solve(uvw, a, a).total_cost == 0.0

    def test_two_by_two(self, uvw):
        # oracle: vertex enumeration gives u->u 0.5, v->w 0.5, total 0.1464466
        plan = solve(uvw, dv({0: 0.5, 1: 0.5}), dv({0: 0.5, 2: 0.5}))
        np.testing.assert_allclose(plan.flows, [[0.5, 0.0], [0.0, 0.5]], atol=1e-15)
        assert plan.total_cost == pytest.approx(0.146447, abs=1e-6)
        assert plan.total_cost == pytest.approx(0.5 * C45, abs=1e-15)

    def test_vertex_oracle_agrees_on_tiny(self, rng):
        for _ in range(30):
            m, n = rng.integers(1, 4, size=2)
            a = rng.random(m) + 0.01
            b = rng.random(n) + 0.01
            a, b = a / a.sum(), b / b.sum()
            c = rng.random((m, n))
            flows, _ = network_simplex(a, b, c)
            assert np.sum(flows * c) == pytest.approx(transport_vertices(a, b, c)[0], abs=1e-12)


class TestErrors:
    def test_not_normalized(self, uvw):
        a = DocumentVector("a", np.array([0]), np.array([0.9]))
        b = dv({1: 1.0})
        with pytest.raises(TransportError, match="L1"):
            solve_transport(a, b, pair_costs(uvw, a, b))

    def test_shape_mismatch(self, uvw):
        a, b = dv({0: 1.0}), dv({1: 0.5, 2: 0.5})
        with pytest.raises(TransportError):
            solve_transport(a, b, uvw.cost_matrix([0], [1]))

    def test_small_imbalance_rebalanced(self, uvw):
        a = DocumentVector("a", np.array([0, 1]), np.array([0.5, 0.5 + 5e-10]))
        b = dv({2: 1.0})
        plan = solve_transport(a, b, pair_costs(uvw, a, b))
        np.testing.assert_allclose(plan.flows.sum(axis=1), a.weights, atol=1e-15)

    def test_iteration_cap_reports_instance(self):
        with pytest.raises(SolverError) as info:
            network_simplex([0.5, 0.5], [0.5, 0.5], np.array([[1.0, 0.0], [0.0, 1.0]]), max_iter=0)
        assert info.value.instance["costs"] == [[1.0, 0.0], [0.0, 1.0]]


class TestDegenerate:
    def test_heavily_degenerate_instances(self, rng):
        # integer-ish masses and tied costs produce many zero-step pivots
        for _ in range(200):
            m, n = rng.integers(2, 9, size=2)
            a = rng.integers(1, 4, size=m).astype(float)
            b = rng.integers(1, 4, size=n).astype(float)
            a, b = a / a.sum(), b / b.sum()
            c = rng.integers(0, 3, size=(m, n)).astype(float)
            flows, _ = network_simplex(a, b, c)
            ref, _ = transport_lp(a, b, c)
            assert np.sum(flows * c) == pytest.approx(ref, abs=1e-9)
            np.testing.assert_allclose(flows.sum(1), a, atol=1e-12)
            np.testing.assert_allclose(flows.sum(0), b, atol=1e-12)

    def test_bland_fallback_reaches_optimum(self, rng, monkeypatch):
        import wmdecomp.transport as tr

        monkeypatch.setattr(tr, "MAX_DEGENERATE", 0)
        for _ in range(50):
            m, n = rng.integers(2, 7, size=2)
            a = np.full(m, 1 / m)
            b = np.full(n, 1 / n)
            c = rng.integers(0, 2, size=(m, n)).astype(float)
            flows, _ = tr.network_simplex(a, b, c)
            assert np.sum(flows * c) == pytest.approx(transport_lp(a, b, c)[0], abs=1e-9)


class TestRwmd:
    def test_single_word_tight(self, uvw):
        a, b = dv({0: 1.0}), dv({2: 1.0})
        assert rwmd(a, b, pair_costs(uvw, a, b), "max") == solve(uvw, a, b).total_cost

    def test_shared_words_give_zero(self):
        store = EmbeddingStore(["u", "v"], [[1.0, 0.0], [0.0, 1.0]])
        a, b = dv({0: 0.75, 1: 0.25}), dv({0: 0.25, 1: 0.75})
        costs = pair_costs(store, a, b)
        assert rwmd(a, b, costs, "ab") == 0.0
        assert rwmd(a, b, costs, "ba") == 0.0
        # vertex-enumeration oracle: 0.5
        assert solve(store, a, b).total_cost == pytest.approx(0.5, abs=1e-12)

    def test_single_target(self, uvw):
        a, b = dv({0: 0.5, 1: 0.5}), dv({2: 1.0})
        r = rwmd(a, b, pair_costs(uvw, a, b), "ab")
        assert r == pytest.approx(C45, abs=1e-15)
        assert r == pytest.approx(solve(uvw, a, b).total_cost, abs=1e-15)

    def test_bad_direction(self, uvw):
        a = dv({0: 1.0})
        with pytest.raises(TransportError):
            rwmd(a, a, pair_costs(uvw, a, a), "sideways")


def _random_set(rng, n_docs, vocab_size, max_words=6, label="s"):
    vecs = []
    for k in range(n_docs):
        size = int(rng.integers(1, max_words + 1))
        idx = rng.choice(vocab_size, size=size, replace=False)
        w = rng.random(size) + 0.05
        vecs.append(DocumentVector.from_dict(f"{label}{k}", dict(zip(idx.tolist(), (w / w.sum()).tolist()))))
    return DocumentSet(label, vecs, Vocabulary([f"w{i}" for i in range(vocab_size)]))


class TestLcRwmd:
    def test_one_by_one(self, uvw):
        vocab = Vocabulary(uvw.words)
        a, b = dv({0: 0.5, 1: 0.5}), dv({2: 1.0})
        m = lc_rwmd_matrix(DocumentSet("a", [a], vocab), DocumentSet("b", [b], vocab), uvw, "ab")
        assert m.values.shape == (1, 1)
        assert m.values[0, 0] == pytest.approx(rwmd(a, b, pair_costs(uvw, a, b), "ab"), abs=1e-15)

    @pytest.mark.parametrize("direction", ["ab", "ba", "max"])
    def test_matches_direct(self, rng, direction):
        store = EmbeddingStore([f"w{i}" for i in range(30)], unit_sphere(rng, 30, 8))
        sa, sb = _random_set(rng, 3, 30, label="a"), _random_set(rng, 3, 30, label="b")
        m = lc_rwmd_matrix(sa, sb, store, direction)
        for p in range(3):
            for q in range(3):
                direct = rwmd(sa[p], sb[q], pair_costs(store, sa[p], sb[q]), direction)
                assert m.values[p, q] == pytest.approx(direct, abs=1e-9)

    def test_self_zero_diagonal(self, rng):
        store = EmbeddingStore([f"w{i}" for i in range(30)], unit_sphere(rng, 30, 8))
        sa = _random_set(rng, 6, 30)
        for exact in (True, False):
            m = lc_rwmd_matrix(sa, sa, store, "max", exact=exact)
            assert np.all(np.diag(m.values) == 0.0)

    def test_empty_rejected(self, uvw):
        with pytest.raises(Exception):
            lc_rwmd_matrix([], [], uvw)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["cosine", "euclidean"]))
def test_plan_invariants(seed, metric):
    rng = np.random.default_rng(seed)
    store = EmbeddingStore([f"w{i}" for i in range(20)], unit_sphere(rng, 20, 5), metric)
    da, db = random_document_pair(rng, 20)
    a, b = DocumentVector.from_dict("a", da), DocumentVector.from_dict("b", db)
    costs = pair_costs(store, a, b)
    plan = solve_transport(a, b, costs)
    np.testing.assert_allclose(plan.flows.sum(axis=1), a.weights, atol=1e-9)
    np.testing.assert_allclose(plan.flows.sum(axis=0), b.weights, atol=1e-9)
    assert np.all(plan.flows >= 0)
    assert plan.total_cost == pytest.approx(float(np.sum(plan.flows * costs.values)), abs=1e-9)
    # basic solution: at most m + n - 1 non-zero cells
    assert np.count_nonzero(plan.flows) <= len(a) + len(b) - 1
    reverse = solve_transport(b, a, pair_costs(store, b, a))
    assert reverse.total_cost == pytest.approx(plan.total_cost, abs=1e-9)
    lower = max(rwmd(a, b, costs, "ab"), rwmd(a, b, costs, "ba"))
    assert lower <= plan.total_cost + 1e-9
    assert plan.total_cost == pytest.approx(transport_lp(a.weights, b.weights, costs.values)[0], abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_cost_scaling(seed, lam):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 7, size=2)
    a = rng.random(m) + 0.05
    b = rng.random(n) + 0.05
    a, b = a / a.sum(), b / b.sum()
    c = rng.random((m, n))
    f1, _ = network_simplex(a, b, c)
    f2, _ = network_simplex(a, b, lam * c)
    assert np.sum(f2 * lam * c) == pytest.approx(lam * np.sum(f1 * c), rel=1e-9, abs=1e-12)
    np.testing.assert_array_equal(f1 > 1e-12, f2 > 1e-12)
