"""Slow, loop-based reference implementations used for cross-checking.

Everything here is written from the definitions with plain Python loops and
``math`` arithmetic, deliberately sharing no code with the production
scorers or the box construction. The test suite and the CLI's ``--oracle``
mode use these paths to generate independent expected values.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .embeddings import EmbeddingStore, SimilarityMeasure


def naive_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(math.fsum(x * x for x in a))
    norm_b = math.sqrt(math.fsum(y * y for y in b))
    return dot / (norm_a * norm_b)


def naive_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))


def naive_similarity(a: Sequence[float], b: Sequence[float], measure: SimilarityMeasure) -> float:
    if measure is SimilarityMeasure.ANGLE:
        return naive_cosine(a, b)
    if measure is SimilarityMeasure.DISTANCE:
        return 1.0 / (1.0 + naive_distance(a, b))
    return naive_cosine(a, b) * (1.0 / (1.0 + naive_distance(a, b)))


def naive_rank(
    store: EmbeddingStore,
    probe: str,
    measure: SimilarityMeasure,
    count: int,
) -> list[tuple[str, float]]:
    """All-pairs scoring and a stable sort; ties by word."""
    probe_vec = [float(x) for x in store.vector(probe)]
    scored = []
    for word in store.words:
        vec = [float(x) for x in store.vector(word)]
        scored.append((word, naive_similarity(probe_vec, vec, measure)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:count]


def naive_boxes(
    store: EmbeddingStore,
    probe: str,
    measure: SimilarityMeasure,
    k: int,
    n: int,
) -> tuple[list[str], list[str]]:
    """Safe box (ranks 1..k) and candidate box (ranks k+1..k+n) by full sort."""
    ranked = naive_rank(store, probe, measure, k + n)
    return [w for w, _ in ranked[:k]], [w for w, _ in ranked[k:]]


def naive_bm25_scores(
    doc_tokens: Mapping[str, Sequence[str]],
    query_tokens: Sequence[str],
    k1: float = 1.2,
    b: float = 0.75,
) -> dict[str, float]:
    """BM25 from the formula, one document and one query term at a time."""
    n = len(doc_tokens)
    avgdl = math.fsum(len(v) for v in doc_tokens.values()) / n
    scores: dict[str, float] = {}
    for doc_id, tokens in doc_tokens.items():
        total = 0.0
        for term in query_tokens:
            tf = sum(1 for t in tokens if t == term)
            if tf == 0:
                continue
            df = sum(1 for other in doc_tokens.values() if term in other)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            total += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len(tokens) / avgdl))
        if total > 0.0:
            scores[doc_id] = total
    return scores


def naive_tfidf_scores(
    doc_tokens: Mapping[str, Sequence[str]],
    query_tokens: Sequence[str],
) -> dict[str, float]:
    """Dense ltc-weighted cosine: build both vectors over the full vocabulary."""
    n = len(doc_tokens)
    vocabulary = sorted({t for tokens in doc_tokens.values() for t in tokens})

    def ltc_vector(tokens: Sequence[str]) -> list[float]:
        weights = []
        for term in vocabulary:
            tf = sum(1 for t in tokens if t == term)
            if tf == 0:
                weights.append(0.0)
                continue
            df = sum(1 for other in doc_tokens.values() if term in other)
            if df == 0:
                weights.append(0.0)
                continue
            weights.append((1.0 + math.log(tf)) * math.log(n / df))
        return weights

    query_vec = ltc_vector(query_tokens)
    query_norm = math.sqrt(math.fsum(w * w for w in query_vec))
    scores: dict[str, float] = {}
    if query_norm == 0.0:
        return scores
    for doc_id, tokens in doc_tokens.items():
        doc_vec = ltc_vector(tokens)
        doc_norm = math.sqrt(math.fsum(w * w for w in doc_vec))
        if doc_norm == 0.0:
            continue
        dot = math.fsum(q * d for q, d in zip(query_vec, doc_vec))
        if dot > 0.0:
            scores[doc_id] = dot / (query_norm * doc_norm)
    return scores


def naive_pooled_mean(tokens: Sequence[str], store: EmbeddingStore) -> list[float] | None:
    known = [t for t in tokens if t in store]
    if not known:
        return None
    dim = store.dimension
    pooled = [0.0] * dim
    for token in known:
        vec = store.vector(token)
        for i in range(dim):
            pooled[i] += float(vec[i])
    return [x / len(known) for x in pooled]


def naive_embedding_scores(
    doc_tokens: Mapping[str, Sequence[str]],
    query_tokens: Sequence[str],
    store: EmbeddingStore,
) -> dict[str, float]:
    query_vec = naive_pooled_mean(query_tokens, store)
    if query_vec is None:
        raise ValueError("no in-vocabulary query tokens")
    scores: dict[str, float] = {}
    for doc_id, tokens in doc_tokens.items():
        doc_vec = naive_pooled_mean(tokens, store)
        if doc_vec is None:
            continue
        scores[doc_id] = naive_cosine(query_vec, doc_vec)
    return scores


def rank_scores(scores: Mapping[str, float], top: int) -> list[tuple[str, float]]:
    """Descending score, ties by doc id, cut to the requested depth."""
    return sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:top]


def naive_ndcg_at(
    ranked_doc_ids: Sequence[str],
    graded: Mapping[str, int],
    cutoff: int,
) -> float:
    """DCG over the ranked prefix divided by the best achievable DCG."""
    positives = {d: r for d, r in graded.items() if r > 0}
    if not positives:
        raise ValueError("no relevant documents")
    dcg = 0.0
    for position, doc_id in enumerate(ranked_doc_ids[:cutoff], start=1):
        gain = 2.0 ** positives.get(doc_id, 0) - 1.0
        dcg += gain / (math.log(position + 1) / math.log(2))
    ideal = 0.0
    best = sorted(positives.values(), reverse=True)
    for position, rel in enumerate(best[:cutoff], start=1):
        ideal += (2.0**rel - 1.0) / (math.log(position + 1) / math.log(2))
    return dcg / ideal


def naive_recall(retrieved: Sequence[str], relevant: Sequence[str]) -> float:
    relevant_set = set(relevant)
    if not relevant_set:
        raise ValueError("no relevant documents")
    hits = sum(1 for doc in relevant_set if doc in set(retrieved))
    return hits / len(relevant_set)
