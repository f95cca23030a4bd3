"""Privacy measures between original and obfuscated queries.

Lexical similarity is the Jaccard overlap of token sets; semantic similarity
is the cosine of mean-pooled word vectors (a lightweight stand-in for a
sentence encoder). Uncertainty statistics are Monte Carlo estimates of the
per-word failure rate (probability a mechanism returns its input) and of the
effective output-support size at a tail mass eta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore, cosine_similarity
from .preprocess import TaggedQuery
from .wbb import ObfuscationResult

# A mechanism, for estimation purposes, maps (word, rng, count) to outputs.
WordMechanism = Callable[[str, np.random.Generator, int], Sequence[str]]


class UndefinedSimilarityError(ValueError):
    """Semantic similarity is undefined when a side has no known words."""


def jaccard(original_tokens: Iterable[str], obfuscated_tokens: Iterable[str]) -> float:
    """|A ∩ B| / |A ∪ B| over token sets; two empty sets count as identical (1)."""
    a, b = set(original_tokens), set(obfuscated_tokens)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def pooled_vector(tokens: Iterable[str], store: EmbeddingStore) -> np.ndarray:
    """Mean of the in-vocabulary token vectors; error when none qualify."""
    vectors = [store.vector(t) for t in tokens if t in store]
    if not vectors:
        raise UndefinedSimilarityError("no in-vocabulary tokens to pool")
    return np.mean(vectors, axis=0)


def semantic_similarity(
    original: Sequence[str],
    obfuscated: Sequence[str],
    store: EmbeddingStore,
) -> float:
    """Cosine between the mean-pooled vectors of the two token lists."""
    return cosine_similarity(pooled_vector(original, store), pooled_vector(obfuscated, store))


def estimate_failure_rate(
    word: str,
    mechanism: WordMechanism,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of Pr[mechanism(word) == word]."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    outputs = np.asarray(mechanism(word, rng, trials), dtype=object)
    return float(np.count_nonzero(outputs == word)) / trials


def estimate_support_size(
    word: str,
    mechanism: WordMechanism,
    eta: float,
    trials: int,
    rng: np.random.Generator,
) -> int:
    """Smallest number of distinct outputs whose empirical mass reaches 1 - eta."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if trials < 100.0 / eta:
        raise ValueError(f"trials must be >= 100/eta = {100.0 / eta:.0f} to resolve the tail")
    outputs = np.asarray(mechanism(word, rng, trials), dtype=object)
    _, counts = np.unique(outputs.astype(str), return_counts=True)
    counts = np.sort(counts)[::-1]
    cumulative = np.cumsum(counts) / trials
    return int(np.searchsorted(cumulative, 1.0 - eta) + 1)


def target_jaccard(result: ObfuscationResult) -> float:
    """Jaccard restricted to target positions: original target words vs their
    replacements. Queries without targets count as identical (1)."""
    original, output = [], []
    for token, out in zip(result.original.tokens, result.obfuscated_tokens):
        if token.target:
            original.append(token.surface)
            output.append(out)
    return jaccard(original, output)


@dataclass(frozen=True)
class PrivacyRecord:
    """One obfuscation replicate scored against its original query."""

    query_id: str
    mechanism: str
    epsilon: float
    replicate: int
    jaccard: float
    jaccard_targets: float
    semantic: float


def evaluate_result(
    query_id: str,
    mechanism: str,
    epsilon: float,
    replicate: int,
    tagged: TaggedQuery,
    result: ObfuscationResult,
    store: EmbeddingStore,
) -> PrivacyRecord:
    return PrivacyRecord(
        query_id=query_id,
        mechanism=mechanism,
        epsilon=epsilon,
        replicate=replicate,
        jaccard=jaccard(tagged.surfaces, result.obfuscated_tokens),
        jaccard_targets=target_jaccard(result),
        semantic=semantic_similarity(tagged.surfaces, result.obfuscated_tokens, store),
    )


@dataclass(frozen=True)
class PrivacySummary:
    """Aggregates over all records sharing a (mechanism, epsilon) cell."""

    mechanism: str
    epsilon: float
    count: int
    mean_jaccard: float
    std_jaccard: float
    mean_jaccard_targets: float
    mean_semantic: float
    std_semantic: float


def summarize_records(records: Sequence[PrivacyRecord]) -> list[PrivacySummary]:
    """One summary row per (mechanism, epsilon), in first-seen order."""
    groups: dict[tuple[str, float], list[PrivacyRecord]] = {}
    for record in records:
        groups.setdefault((record.mechanism, record.epsilon), []).append(record)
    summaries = []
    for (mechanism, epsilon), rows in groups.items():
        jac = np.array([r.jaccard for r in rows])
        jac_t = np.array([r.jaccard_targets for r in rows])
        sem = np.array([r.semantic for r in rows])
        summaries.append(
            PrivacySummary(
                mechanism=mechanism,
                epsilon=epsilon,
                count=len(rows),
                mean_jaccard=float(jac.mean()),
                std_jaccard=float(jac.std()),
                mean_jaccard_targets=float(jac_t.mean()),
                mean_semantic=float(sem.mean()),
                std_semantic=float(sem.std()),
            )
        )
    return summaries
