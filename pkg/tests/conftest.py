import numpy as np
import pytest

from queryblend import toydata
from queryblend.embeddings import EmbeddingStore, load_embeddings
from queryblend.preprocess import TagLexicon

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def toy_store() -> EmbeddingStore:
    """Five 2-d words with a known similarity order around ``wstar``."""
    return EmbeddingStore.from_pairs(
        [
            ("wstar", [1.0, 0.0]),
            ("a", [0.99, 0.1]),
            ("b", [0.7, 0.7]),
            ("c", [0.0, 1.0]),
            ("d", [-1.0, 0.0]),
        ]
    )


@pytest.fixture(scope="session")
def tiny_store() -> EmbeddingStore:
    return load_embeddings(FIXTURES / "embeddings.txt")


@pytest.fixture(scope="session")
def lexicon() -> TagLexicon:
    return TagLexicon.load(FIXTURES / "lexicon.txt", stopwords_path=FIXTURES / "stopwords.txt")


@pytest.fixture(scope="session")
def desk_store() -> EmbeddingStore:
    """5000-word, 50-d toy embedding used by the heavier statistical checks."""
    return toydata.build_store(n_words=5000, dim=50, seed=13)


@pytest.fixture(scope="session")
def desk_fixture_dir(tmp_path_factory) -> Path:
    """On-disk copy of the desk fixture set for CLI-level runs."""
    directory = tmp_path_factory.mktemp("deskfix")
    toydata.write_desk_fixture(directory, n_words=5000, dim=50, seed=13)
    return directory


def integer_store(rng: np.random.Generator, size: int, dim: int) -> EmbeddingStore:
    """Random store with small-integer components.

    Integer-valued vectors make every dot product and squared distance exact
    in float64, so the vectorized rankings and the pure-Python oracles compute
    bit-identical scores and any disagreement is a logic bug, not rounding.
    """
    span = 3
    while (2 * span + 1) ** dim - 1 < 4 * size:  # keep rejection sampling fast
        span += 1
    vectors = np.zeros((size, dim))
    seen = set()
    for i in range(size):
        while True:
            candidate = rng.integers(-span, span + 1, size=dim).astype(np.float64)
            key = tuple(candidate)
            if np.any(candidate) and key not in seen:
                seen.add(key)
                vectors[i] = candidate
                break
    words = [f"v{i:03d}" for i in range(size)]
    return EmbeddingStore(words, vectors)
