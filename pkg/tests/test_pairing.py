import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import suitor_optimal
from wmdecomp.pairing import (
    PairingError,
    PairingResult,
    gale_shapley,
    random_pairs,
    read_pairs,
    subsample_to_match,
    verify_stable,
    write_pairs,
)
from wmdecomp.transport import DistanceMatrix


class TestGaleShapley:
    def test_example(self):
        d = [[0.1, 0.2], [0.3, 0.05]]
        assert gale_shapley(d).pairs == ((0, 0), (1, 1))

    def test_all_equal_gives_identity(self):
        assert gale_shapley(np.full((4, 4), 0.3)).pairs == ((0, 0), (1, 1), (2, 2), (3, 3))

    def test_reviewer_tie_goes_to_lower_suitor(self):
        assert gale_shapley([[0.1, 0.2], [0.1, 0.4]]).pairs == ((0, 0), (1, 1))

    def test_accepts_distance_matrix(self):
        m = DistanceMatrix(np.array([[0.1, 0.2], [0.3, 0.05]]), "ab")
        res = gale_shapley(m)
        assert res.method == "gale-shapley" and res.is_perfect()

    def test_non_square(self):
        with pytest.raises(PairingError):
            gale_shapley(np.zeros((2, 3)))

    def test_non_finite(self):
        with pytest.raises(PairingError):
            gale_shapley([[0.0, np.inf], [0.0, 0.0]])

    def test_suitor_side_b(self, rng):
        d = rng.random((6, 6))
        res = gale_shapley(d, "b")
        assert res.is_perfect()
        assert verify_stable(res, d, "b") is None
        # side-b proposals equal side-a proposals on the transposed problem
        flipped = gale_shapley(d.T, "a")
        assert sorted((j, i) for i, j in flipped.pairs) == list(res.pairs)

    def test_zero_diagonal_gives_identity(self, rng):
        d = rng.integers(0, 2, size=(8, 8)).astype(float)
        d = np.maximum(d, d.T)
        np.fill_diagonal(d, 0.0)
        assert gale_shapley(d).pairs == tuple((i, i) for i in range(8))


class TestVerifyStable:
    def test_blocking_pair(self):
        d = [[0.1, 0.2], [0.3, 0.05]]
        assert verify_stable(PairingResult([(0, 1), (1, 0)], "forced"), d) == (0, 0)

    def test_singleton(self):
        assert verify_stable(PairingResult([(0, 0)], "forced"), [[1.0]]) is None


class TestRandomPairs:
    def test_single_pair(self):
        assert random_pairs(1, 1, 3, seed=0).pairs == ((0, 0),) * 3

    def test_deterministic(self):
        assert random_pairs(50, 40, 100, 3) == random_pairs(50, 40, 100, 3)
        assert random_pairs(50, 40, 100, 3) != random_pairs(50, 40, 100, 4)

    def test_uniform_marginals(self):
        res = random_pairs(100, 100, 10_000, seed=11)
        counts = np.bincount([i for i, _ in res.pairs], minlength=100)
        # each row index ~ Binomial(10000, 0.01): mean 100, sd sqrt(99)
        sd = np.sqrt(10_000 * 0.01 * 0.99)
        assert np.all(np.abs(counts - 100) <= 3 * sd + 1)

    def test_count_must_be_positive(self):
        with pytest.raises(PairingError):
            random_pairs(2, 2, 0, 0)


def test_subsample_to_match():
    ka, kb = subsample_to_match(10, 4, seed=1)
    assert kb == [0, 1, 2, 3] and len(ka) == 4 and len(set(ka)) == 4
    assert (ka, kb) == subsample_to_match(10, 4, seed=1)


def test_pairs_csv_roundtrip(tmp_path):
    res = PairingResult([(0, 2), (1, 0), (2, 1)], "gale-shapley", 5)
    text = write_pairs(res, tmp_path / "p.csv", {"direction": "ab"})
    assert text.splitlines()[:2] == ["# method=gale-shapley seed=5 direction=ab", "a_index,b_index"]
    assert read_pairs(tmp_path / "p.csv") == res


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1), st.booleans())
def test_stable_and_order_invariant(n, seed, coarse):
    rng = np.random.default_rng(seed)
    d = rng.random((n, n))
    if coarse:
        d = np.round(d * 3) / 3  # many ties
    res = gale_shapley(d)
    assert res.is_perfect()
    assert verify_stable(res, d) is None
    assert gale_shapley(np.exp(3 * d) + 7).pairs == res.pairs
    assert gale_shapley(d).pairs == res.pairs


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_suitor_optimal(n, seed, coarse):
    rng = np.random.default_rng(seed)
    d = rng.random((n, n))
    if coarse:
        d = np.round(d * 2) / 2
    res = gale_shapley(d)
    assert tuple(j for _, j in res.pairs) == suitor_optimal(d)


def test_separate_reviewer_preferences(rng):
    d = rng.random((5, 5))
    r = rng.random((5, 5))
    res = gale_shapley(d, reviewer_prefs=r)
    assert verify_stable(res, d, reviewer_prefs=r) is None
    assert tuple(j for _, j in res.pairs) == suitor_optimal(d, r)
