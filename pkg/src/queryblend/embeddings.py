"""Word embeddings: loading, similarity measures, and exact vocabulary ranking.

The store keeps one dense float64 vector per lowercase word. A probe word can
be ranked against the whole vocabulary under three scores: cosine similarity
(angle), a bounded transform of Euclidean distance (distance), and the product
of the two. All three are oriented so that larger means more similar, which
keeps downstream standardization and sampling uniform across measures.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path

import numpy as np


class EmbeddingFormatError(ValueError):
    """Embedding file violates the one-word-per-line vector format."""


class OutOfVocabularyError(KeyError):
    """Requested word has no vector in the store."""


class SimilarityMeasure(Enum):
    """Scoring variant used to rank vocabulary words against a probe word."""

    ANGLE = "angle"
    DISTANCE = "distance"
    PRODUCT = "product"

    @classmethod
    def parse(cls, name: str) -> "SimilarityMeasure":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown similarity measure {name!r} (expected one of: {valid})") from None


def distance_to_similarity(distance):
    """Map a distance d >= 0 into (0, 1], monotone decreasing, finite at d=0."""
    return 1.0 / (1.0 + distance)


class EmbeddingStore:
    """Immutable word-to-vector table over a fixed vocabulary.

    Words are unique and lowercase; all vectors share one dimension and none
    is the zero vector (cosine would be undefined). The vector matrix is
    frozen after construction, so a store can be shared freely.
    """

    def __init__(self, words, vectors):
        self._words = tuple(words)
        matrix = np.array(vectors, dtype=np.float64)
        if matrix.ndim != 2:
            raise EmbeddingFormatError("vectors must form a 2-d matrix")
        if matrix.shape[0] != len(self._words):
            raise EmbeddingFormatError("one vector per word required")
        if matrix.shape[0] == 0:
            raise EmbeddingFormatError("empty vocabulary")
        if not np.all(np.isfinite(matrix)):
            raise EmbeddingFormatError("non-finite vector component")
        self._index: dict[str, int] = {}
        for i, word in enumerate(self._words):
            if word in self._index:
                raise EmbeddingFormatError(f"duplicate word {word!r}")
            self._index[word] = i
        norms = np.linalg.norm(matrix, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise EmbeddingFormatError(f"zero vector for word {self._words[zero[0]]!r}")
        matrix.setflags(write=False)
        self._vectors = matrix
        self._norms = norms
        self._word_array = np.array(self._words)

    @property
    def words(self) -> tuple[str, ...]:
        return self._words

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dimension(self) -> int:
        return self._vectors.shape[1]

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise OutOfVocabularyError(word) from None

    def vector(self, word: str) -> np.ndarray:
        return self._vectors[self.index(word)]

    @classmethod
    def from_pairs(cls, pairs) -> "EmbeddingStore":
        """Build a store from (word, vector) pairs, mostly for tests and toys."""
        words, vectors = zip(*pairs)
        return cls(words, np.asarray(vectors, dtype=np.float64))

    @classmethod
    def load(cls, path, expected_dim: int | None = None) -> "EmbeddingStore":
        return load_embeddings(path, expected_dim)


def load_embeddings(path, expected_dim: int | None = None) -> EmbeddingStore:
    """Parse a text embedding file into a store.

    Format: one record per line, ``<token> <f1> <f2> ... <fD>``, whitespace
    separated, UTF-8, no header. Tokens are lowercased on load; when two
    case variants collide, the first occurrence wins. A byte-identical token
    appearing twice is an error, as are arity mismatches, non-numeric
    components, and empty files.
    """
    path = Path(path)
    words: list[str] = []
    vectors: list[list[float]] = []
    raw_forms: dict[str, str] = {}
    dim = expected_dim
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            raw, components = parts[0], parts[1:]
            if dim is None:
                if not components:
                    raise EmbeddingFormatError(f"{path.name}:{lineno}: no vector components")
                dim = len(components)
            if len(components) != dim:
                raise EmbeddingFormatError(
                    f"{path.name}:{lineno}: expected {dim} components, found {len(components)}"
                )
            try:
                values = [float(c) for c in components]
            except ValueError:
                raise EmbeddingFormatError(f"{path.name}:{lineno}: non-numeric component") from None
            word = raw.lower()
            if word in raw_forms:
                if raw_forms[word] == raw:
                    raise EmbeddingFormatError(f"{path.name}:{lineno}: duplicate word {raw!r}")
                continue  # case variant of an already-loaded word; first one wins
            raw_forms[word] = raw
            words.append(word)
            vectors.append(values)
    if not words:
        raise EmbeddingFormatError(f"{path.name}: no embedding records")
    return EmbeddingStore(words, np.asarray(vectors, dtype=np.float64))


def _as_vector(value) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim != 1:
        raise ValueError("expected a 1-d vector")
    return array


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1]."""
    a, b = _as_vector(a), _as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.dot(a, b) / (norm_a * norm_b))


def euclidean_distance(a, b) -> float:
    a, b = _as_vector(a), _as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


def similarity_scores(store: EmbeddingStore, probe: str, measure: SimilarityMeasure) -> np.ndarray:
    """Unified similarity of every vocabulary word to the probe word.

    Angle gives the cosine, distance gives 1/(1+d) for the Euclidean
    distance d, and product multiplies the two. Higher is always closer.
    """
    v = store.vector(probe)
    if measure is SimilarityMeasure.ANGLE:
        return (store.vectors @ v) / (store._norms * np.linalg.norm(v))
    dist = np.sqrt(((store.vectors - v) ** 2).sum(axis=1))
    if measure is SimilarityMeasure.DISTANCE:
        return distance_to_similarity(dist)
    cos = (store.vectors @ v) / (store._norms * np.linalg.norm(v))
    return cos * distance_to_similarity(dist)


def rank_by_similarity(
    store: EmbeddingStore,
    probe: str,
    measure: SimilarityMeasure,
    count: int,
) -> list[tuple[str, float]]:
    """The `count` vocabulary words most similar to the probe, best first.

    The probe itself participates in the ranking (it is position 1 under the
    angle measure). Score ties are broken by lexicographic word order, making
    the ranking a deterministic function of the store.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if count > len(store):
        raise ValueError(f"count {count} exceeds vocabulary size {len(store)}")
    scores = similarity_scores(store, probe, measure)
    order = np.lexsort((store._word_array, -scores))[:count]
    return [(store.words[i], float(scores[i])) for i in order]
