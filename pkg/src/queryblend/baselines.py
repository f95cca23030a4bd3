"""Noise-addition word obfuscators used as comparison baselines.

Both baselines perturb a word's embedding and emit the vocabulary word
nearest to the noisy point. The ``cmp`` variant draws multivariate Laplace
noise as magnitude times direction: the direction is uniform on the unit
sphere and the magnitude follows Gamma(shape=D, scale=1/eps). The
``mahalanobis`` variant shapes the direction with the square root of a
regularized vocabulary covariance before renormalizing, which tilts draws
toward high-variance (denser) regions of the embedding space.

Unlike the safe-box mechanism, these baselines can return the original word
when the noise is small, so their failure rate grows with the budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .embeddings import EmbeddingStore
from .preprocess import TaggedQuery
from .wbb import KEPT_OOV, REPLACED, ObfuscationResult

VARIANTS = ("cmp", "mahalanobis")

_NN_CHUNK = 256  # rows of noisy points scored against the vocabulary at once


@dataclass(frozen=True)
class NoiseMechanismConfig:
    """Privacy budget plus variant; ``lam`` blends covariance into the shaping."""

    epsilon: float
    variant: str = "cmp"
    lam: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValueError("epsilon must be a finite positive real")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.variant == "mahalanobis":
            if self.lam is None or not 0.0 <= self.lam <= 1.0:
                raise ValueError("mahalanobis requires lambda in [0, 1]")
        elif self.lam is not None:
            raise ValueError("lambda only applies to the mahalanobis variant")

    def tag(self) -> str:
        if self.variant == "mahalanobis":
            return f"mahalanobis-eps{self.epsilon:g}-lam{self.lam:g}"
        return f"cmp-eps{self.epsilon:g}"


def sphere_direction(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the unit (dim-1)-sphere."""
    g = rng.standard_normal(dim)
    norm = np.linalg.norm(g)
    while norm == 0.0:  # probability zero, but keep the contract total
        g = rng.standard_normal(dim)
        norm = np.linalg.norm(g)
    return g / norm


def shaping_matrix(store: EmbeddingStore, lam: float) -> np.ndarray:
    """Symmetric square root of lam*Sigma + (1-lam)*I.

    Sigma is the vocabulary covariance rescaled to unit mean variance, so
    lam only redistributes variance across axes without changing its total.
    lam=0 short-circuits to the identity (the isotropic baseline).
    """
    dim = store.dimension
    if lam == 0.0:
        return np.eye(dim)
    centered = store.vectors - store.vectors.mean(axis=0)
    cov = centered.T @ centered / max(len(store) - 1, 1)
    trace = float(np.trace(cov))
    if trace <= 0.0:
        raise ValueError("vocabulary covariance is degenerate (identical vectors)")
    cov = cov * (dim / trace)
    blended = lam * cov + (1.0 - lam) * np.eye(dim)
    eigvals, eigvecs = np.linalg.eigh(blended)
    if eigvals.min() <= 1e-12:
        raise ValueError("singular shaping matrix; lower lambda")
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def sample_noise(
    dim: int,
    epsilon: float,
    rng: np.random.Generator,
    shaping: np.ndarray | None = None,
) -> np.ndarray:
    """One noise vector: Gamma(dim, 1/eps) magnitude times a (shaped) direction."""
    direction = sphere_direction(dim, rng)
    if shaping is not None:
        shaped = shaping @ direction
        direction = shaped / np.linalg.norm(shaped)
    magnitude = rng.gamma(shape=dim, scale=1.0 / epsilon)
    return magnitude * direction


def nearest_word(store: EmbeddingStore, point: np.ndarray) -> str:
    """Vocabulary word with minimal Euclidean distance to the point.

    Exact distance ties resolve to the lexicographically smallest word.
    """
    return nearest_words(store, np.asarray(point, dtype=np.float64)[None, :])[0]


def nearest_words(store: EmbeddingStore, points: np.ndarray) -> list[str]:
    """Nearest vocabulary word for each row of ``points`` (chunked scan)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != store.dimension:
        raise ValueError("points must be (m, D) with the store dimension")
    lex_order = np.argsort(store._word_array, kind="stable")
    vectors = store.vectors[lex_order]
    sq_norms = (vectors**2).sum(axis=1)
    winners: list[str] = []
    for start in range(0, points.shape[0], _NN_CHUNK):
        chunk = points[start : start + _NN_CHUNK]
        # squared distance, up to the constant |p|^2; argmin picks the first
        # (lexicographically smallest) word among exact ties
        scores = sq_norms[None, :] - 2.0 * (chunk @ vectors.T)
        best = scores.argmin(axis=1)
        winners.extend(store.words[lex_order[i]] for i in best)
    return winners


def cmp_obfuscate_word(
    word: str,
    epsilon: float,
    store: EmbeddingStore,
    rng: np.random.Generator,
) -> str:
    """Isotropic multivariate-Laplace perturbation, then nearest-word snap."""
    noisy = store.vector(word) + sample_noise(store.dimension, epsilon, rng)
    return nearest_word(store, noisy)


def mahalanobis_obfuscate_word(
    word: str,
    epsilon: float,
    lam: float,
    store: EmbeddingStore,
    rng: np.random.Generator,
    shaping: np.ndarray | None = None,
) -> str:
    """Covariance-shaped perturbation; ``shaping`` may be precomputed and reused."""
    if shaping is None:
        shaping = shaping_matrix(store, lam)
    noisy = store.vector(word) + sample_noise(store.dimension, epsilon, rng, shaping=shaping)
    return nearest_word(store, noisy)


def baseline_obfuscate_query(
    tagged: TaggedQuery,
    config: NoiseMechanismConfig,
    store: EmbeddingStore,
    rng: np.random.Generator,
    stream: str = "",
    shaping: np.ndarray | None = None,
) -> ObfuscationResult:
    """Perturb every in-vocabulary token independently, ignoring the tag gate.

    This matches the baselines' word-by-word behavior; out-of-vocabulary
    tokens pass through flagged. The output may repeat an original word.
    """
    if config.variant == "mahalanobis" and shaping is None:
        shaping = shaping_matrix(store, config.lam)
    out: list[str] = []
    provenance: list[str] = []
    for token in tagged.tokens:
        if token.in_vocab:
            noisy = store.vector(token.surface) + sample_noise(
                store.dimension, config.epsilon, rng, shaping=shaping
            )
            out.append(nearest_word(store, noisy))
            provenance.append(REPLACED)
        else:
            out.append(token.surface)
            provenance.append(KEPT_OOV)
    return ObfuscationResult(
        original=tagged,
        obfuscated_tokens=tuple(out),
        provenance=tuple(provenance),
        stream=stream,
    )


def baseline_word_sampler(
    config: NoiseMechanismConfig,
    store: EmbeddingStore,
) -> Callable[[str, np.random.Generator, int], np.ndarray]:
    """Adapter for the privacy estimators: (word, rng, count) -> output words."""
    shaping = shaping_matrix(store, config.lam) if config.variant == "mahalanobis" else None

    def sampler(word: str, rng: np.random.Generator, size: int) -> np.ndarray:
        base = store.vector(word)
        noisy = np.empty((size, store.dimension))
        for i in range(size):
            noisy[i] = base + sample_noise(store.dimension, config.epsilon, rng, shaping=shaping)
        return np.array(nearest_words(store, noisy), dtype=object)

    return sampler
