import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmdecomp.corpus import (
    CorpusError,
    TokenizedDocument,
    Vocabulary,
    build_vocabulary,
    filter_and_sample,
    idf,
    is_normalized,
    read_corpus,
    vectorize,
    vectorize_all,
)
from wmdecomp.embeddings import EmbeddingStore


def docs(*token_lists):
    return [TokenizedDocument(str(i), t) for i, t in enumerate(token_lists)]


class TestVocabulary:
    def test_min_count(self):
        assert build_vocabulary(docs("a a b".split(), "a c".split()), 2).words == ("a",)

    def test_all_words(self):
        assert build_vocabulary(docs(["a", "b"]), 1).words == ("a", "b")

    def test_oov_dropped(self):
        store = EmbeddingStore(["b", "a"], np.eye(2))
        vocab = build_vocabulary(docs("a a b".split(), "a c".split()), 1, store)
        assert vocab.words == ("a", "b")

    def test_first_occurrence_order(self):
        assert build_vocabulary(docs(["z", "y", "z", "x"])).words == ("z", "y", "x")

    def test_empty_result(self):
        with pytest.raises(CorpusError):
            build_vocabulary(docs(["a"]), 2)


class TestVectorize:
    def test_nbow(self):
        vocab = Vocabulary(["a", "b"])
        v = vectorize(TokenizedDocument("d", "a a b".split()), vocab)
        assert v.as_dict() == {0: 2 / 3, 1: 1 / 3}

    def test_single_word(self):
        v = vectorize(TokenizedDocument("d", ["a"]), Vocabulary(["a"]))
        assert v.as_dict() == {0: 1.0}

    def test_tfidf_example(self):
        corpus = docs("a a b".split(), "a c".split())
        vocab = build_vocabulary(corpus)
        table = idf(vocab, corpus)
        v = vectorize(corpus[0], vocab, "tfidf", table).as_dict()
        # values cross-checked against scikit-learn's smoothed, L1-normed Tf-Idf
        assert v[0] == pytest.approx(0.5873, abs=1e-4)
        assert v[1] == pytest.approx(0.4127, abs=1e-4)
        assert v[0] == pytest.approx(0.587291291059816, abs=1e-12)

    def test_tfidf_needs_table(self):
        with pytest.raises(CorpusError):
            vectorize(TokenizedDocument("d", ["a"]), Vocabulary(["a"]), "tfidf")

    def test_skip_when_no_vocab_tokens(self):
        assert vectorize(TokenizedDocument("d", ["q"]), Vocabulary(["a"])) is None

    def test_ingest_stats(self):
        vectors, stats = vectorize_all(docs(["a", "q"], ["q"]), Vocabulary(["a"]))
        assert len(vectors) == 1
        assert (stats.documents_read, stats.documents_skipped, stats.tokens_dropped) == (2, 1, 2)
        assert stats.skipped_ids == ["1"]


class TestIdf:
    def test_values(self):
        corpus = docs("a a b".split(), "a c".split())
        table = idf(Vocabulary(["a", "b", "z"]), corpus)
        np.testing.assert_allclose(table, [1.0, math.log(1.5) + 1, math.log(3) + 1], atol=1e-12)
        assert table[1] == pytest.approx(1.4055, abs=1e-4)
        assert table[2] == pytest.approx(2.0986, abs=1e-4)

    def test_against_sklearn(self, rng):
        sklearn_text = pytest.importorskip("sklearn.feature_extraction.text")
        words = [f"w{i}" for i in range(15)]
        corpus = docs(*[list(rng.choice(words, size=rng.integers(1, 12))) for _ in range(30)])
        vocab = build_vocabulary(corpus)
        ref = sklearn_text.TfidfVectorizer(
            smooth_idf=True, norm="l1", tokenizer=str.split, token_pattern=None, lowercase=False,
            vocabulary=list(vocab.words),
        )
        mat = ref.fit_transform([" ".join(d.tokens) for d in corpus]).toarray()
        table = idf(vocab, corpus)
        for k, d in enumerate(corpus):
            v = vectorize(d, vocab, "tfidf", table)
            np.testing.assert_allclose(mat[k][v.indices], v.weights, atol=1e-12)


class TestSample:
    corpus = [TokenizedDocument(str(i), ["w"] * (8 if i in (1, 3, 5, 7) else 2)) for i in range(10)]

    def test_population(self):
        out = filter_and_sample(self.corpus, 5, 4, seed=0)
        assert [d.id for d in out] == ["1", "3", "5", "7"]

    def test_insufficient(self):
        with pytest.raises(CorpusError, match="4 eligible"):
            filter_and_sample(self.corpus, 5, 5, seed=0)

    def test_deterministic(self):
        long = [TokenizedDocument(str(i), ["w"] * 40) for i in range(100)]
        a = filter_and_sample(long, 30, 10, seed=7)
        b = filter_and_sample(long, 30, 10, seed=7)
        assert a == b
        assert a != filter_and_sample(long, 30, 10, seed=8)


def test_read_corpus_formats(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"id": "x", "tokens": ["a", "b"]}\n\nplain text line\n{"id": 3, "tokens": "c d"}\n')
    out = read_corpus(p)
    assert [(d.id, d.tokens) for d in out] == [("x", ("a", "b")), ("2", ("plain", "text", "line")), ("3", ("c", "d"))]


token_lists = st.lists(st.sampled_from(list("abcdefg")), min_size=1, max_size=30)


@settings(max_examples=100, deadline=None)
@given(token_lists, st.randoms())
def test_vectorize_properties(tokens, shuffler):
    vocab = Vocabulary(list("abcdefg"))
    v = vectorize(TokenizedDocument("d", tokens), vocab)
    assert is_normalized(v)
    for i, w in v.as_dict().items():
        assert w * len(tokens) == pytest.approx(tokens.count(vocab.words[i]), abs=1e-12)
    shuffled = list(tokens)
    shuffler.shuffle(shuffled)
    assert vectorize(TokenizedDocument("d", shuffled), vocab).as_dict() == v.as_dict()
    corpus = [TokenizedDocument("d", tokens), TokenizedDocument("e", list("abc"))]
    table = idf(vocab, corpus)
    tv = vectorize(corpus[0], vocab, "tfidf", table)
    assert is_normalized(tv)


@settings(max_examples=50, deadline=None)
@given(st.lists(token_lists, min_size=1, max_size=8))
def test_idf_non_increasing_in_df(lists):
    corpus = docs(*lists)
    vocab = Vocabulary(list("abcdefg"))
    table = idf(vocab, corpus)
    df = [sum(w in d.tokens for d in corpus) for w in vocab.words]
    order = np.argsort(df, kind="stable")
    assert np.all(np.diff(table[order]) <= 1e-15)
