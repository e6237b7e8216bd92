"""Seeded toy embeddings and topic corpora for tests and demos."""

from __future__ import annotations

import numpy as np

from .corpus import TokenizedDocument
from .embeddings import EmbeddingStore


def unit_sphere(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def topic_embeddings(rng, n_topics=8, words_per_topic=25, dim=16, spread=0.35, metric="cosine"):
    """Words scattered around random topic anchors on the unit sphere.

    Words are named ``t{topic}_w{k}``. Returns ``(store, topic_words)``.
    """
    anchors = unit_sphere(rng, n_topics, dim)
    words, rows, topic_words = [], [], []
    for t in range(n_topics):
        members = []
        for k in range(words_per_topic):
            v = anchors[t] + spread * rng.standard_normal(dim) / np.sqrt(dim)
            words.append(f"t{t}_w{k}")
            rows.append(v)
            members.append(words[-1])
        topic_words.append(members)
    return EmbeddingStore(words, np.array(rows), metric), topic_words


def topic_corpus(rng, topic_words, n_docs, topic_weights, doc_len=(15, 30), topics_per_doc=2,
                 prefix="d"):
    """Documents mixing a few topics drawn from ``topic_weights``."""
    p = np.asarray(topic_weights, dtype=np.float64)
    p = p / p.sum()
    docs = []
    for n in range(n_docs):
        topics = rng.choice(len(topic_words), size=topics_per_doc, replace=False, p=p)
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        tokens = []
        for _ in range(length):
            t = topics[rng.integers(topics_per_doc)]
            vocab = topic_words[t]
            # Zipf-like word choice within a topic
            k = min(int(rng.zipf(1.6)) - 1, len(vocab) - 1)
            tokens.append(vocab[k])
        docs.append(TokenizedDocument(f"{prefix}{n}", tokens))
    return docs


def overlapping_corpora(seed, n_docs=100, n_topics=8, dim=16, metric="cosine"):
    """Two corpora over shared topics with different (overlapping) topic mixes."""
    rng = np.random.default_rng(seed)
    store, topic_words = topic_embeddings(rng, n_topics=n_topics, dim=dim, metric=metric)
    half = n_topics // 2
    w_a = np.r_[np.full(half + 1, 3.0), np.full(n_topics - half - 1, 1.0)]
    w_b = np.r_[np.full(half - 1, 1.0), np.full(n_topics - half + 1, 3.0)]
    docs_a = topic_corpus(rng, topic_words, n_docs, w_a, prefix="a")
    docs_b = topic_corpus(rng, topic_words, n_docs, w_b, prefix="b")
    return store, docs_a, docs_b


def random_document_pair(rng, store_size, max_words=6):
    """Two random L1-normalized weight dicts over a vocabulary of ``store_size``."""
    out = []
    for _ in range(2):
        k = int(rng.integers(1, max_words + 1))
        idx = rng.choice(store_size, size=k, replace=False)
        w = rng.random(k) + 0.05
        out.append(dict(zip(idx.tolist(), (w / w.sum()).tolist())))
    return out
