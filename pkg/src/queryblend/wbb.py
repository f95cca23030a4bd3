"""Safe-box query obfuscation via the exponential mechanism.

For each target word w the mechanism ranks the whole vocabulary by a
similarity measure, locks the top-k words (w itself included) into a safe
box that can never be emitted, and takes the next n words as the candidate
box C. Candidate similarities s are standardized within C,

    z = (s - mean(C)) / std(C),        u = 1 / (1 + exp(z)),

and a replacement is drawn with probability proportional to exp(eps * u / 2).
The utility sensitivity is bounded by 1 because u lies in (0, 1), so each
draw is eps-differentially private, while the safe box guarantees the
original word (and its nearest neighbors) never appear in the output no
matter how large eps is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .embeddings import EmbeddingStore, SimilarityMeasure, rank_by_similarity
from .preprocess import TaggedQuery
from .streams import derive_rng, stream_name

KEPT_NONTARGET = "kept-nontarget"
KEPT_OOV = "kept-oov"
REPLACED = "replaced"


@dataclass(frozen=True)
class MechanismConfig:
    """Safe-box size k, candidate-box size n, privacy budget, and measure.

    eps = 0 is accepted for analysis runs (sampling becomes uniform over the
    candidate box); production use should keep eps > 0.
    """

    k: int
    n: int
    epsilon: float
    measure: SimilarityMeasure = SimilarityMeasure.ANGLE

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("safe-box size k must be >= 0")
        if self.n < 1:
            raise ValueError("candidate-box size n must be >= 1")
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError("epsilon must be a finite non-negative real")
        if not isinstance(self.measure, SimilarityMeasure):
            raise TypeError("measure must be a SimilarityMeasure")

    def tag(self) -> str:
        return f"wbb-eps{self.epsilon:g}-k{self.k}-n{self.n}-{self.measure.value}"


@dataclass(frozen=True, eq=False)
class CandidateBox:
    """Per-word sampling state: forbidden safe box plus scored candidates.

    ``words``, ``similarities``, ``z_scores``, ``utilities`` and
    ``probabilities`` are parallel, ordered by decreasing similarity.
    """

    probe: str
    safe_box: tuple[str, ...]
    words: tuple[str, ...]
    similarities: np.ndarray
    z_scores: np.ndarray
    utilities: np.ndarray
    probabilities: np.ndarray

    def to_records(self) -> list[dict]:
        """Diagnostic rows (word, similarity, z, utility, probability)."""
        return [
            {
                "word": w,
                "similarity": float(s),
                "z_score": float(z),
                "utility": float(u),
                "probability": float(p),
            }
            for w, s, z, u, p in zip(
                self.words, self.similarities, self.z_scores, self.utilities, self.probabilities
            )
        ]


def standardized_scores(similarities) -> np.ndarray:
    """Z-scores of candidate similarities against their own mean and
    population standard deviation. A constant set standardizes to all zeros."""
    sims = np.asarray(similarities, dtype=np.float64)
    if sims.size == 0:
        raise ValueError("empty candidate set")
    sigma = float(np.std(sims))
    if sigma == 0.0:
        return np.zeros_like(sims)
    return (sims - sims.mean()) / sigma


def utility(z_score):
    """Sigmoid utility 1/(1+exp(z)); decreasing, 0.5 at z=0, bounded in (0,1).

    Higher-similarity candidates get larger z and therefore lower utility.
    """
    value = expit(-np.asarray(z_score, dtype=np.float64))
    return float(value) if value.ndim == 0 else value


def sampling_distribution(utilities, epsilon: float) -> np.ndarray:
    """Exponential-mechanism probabilities p_i = exp(eps*u_i/2) / sum_j exp(eps*u_j/2).

    The divisor 2 carries the utility sensitivity bound of 1. Exponents are
    max-shifted before exponentiation so large eps cannot overflow. epsilon=0
    yields exactly 1/n per candidate.
    """
    u = np.asarray(utilities, dtype=np.float64)
    if u.size == 0:
        raise ValueError("empty candidate list")
    if not np.isfinite(epsilon) or epsilon < 0:
        raise ValueError("epsilon must be a finite non-negative real")
    logits = (epsilon * u) / 2.0
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def build_boxes(probe: str, config: MechanismConfig, store: EmbeddingStore) -> CandidateBox:
    """Rank the vocabulary around the probe and slice safe and candidate boxes.

    The safe box holds ranks 1..k (the probe is rank 1 for k >= 1) and the
    candidate box ranks k+1..k+n, each with its standardized score, utility,
    and sampling probability at the configured epsilon.
    """
    if config.k + config.n > len(store):
        raise ValueError(
            f"k + n = {config.k + config.n} exceeds vocabulary size {len(store)}"
        )
    ranked = rank_by_similarity(store, probe, config.measure, config.k + config.n)
    safe = tuple(word for word, _ in ranked[: config.k])
    if config.k >= 1 and probe not in safe:
        raise ValueError(f"probe {probe!r} displaced from its own safe box (duplicate vectors?)")
    candidates = ranked[config.k :]
    words = tuple(word for word, _ in candidates)
    sims = np.array([score for _, score in candidates], dtype=np.float64)
    z = standardized_scores(sims)
    u = expit(-z)
    p = sampling_distribution(u, config.epsilon)
    return CandidateBox(
        probe=probe,
        safe_box=safe,
        words=words,
        similarities=sims,
        z_scores=z,
        utilities=u,
        probabilities=p,
    )


def sample_word(box: CandidateBox, epsilon: float, rng: np.random.Generator) -> str:
    """Draw one replacement from the candidate box at the given budget."""
    p = sampling_distribution(box.utilities, epsilon)
    return box.words[int(rng.choice(len(box.words), p=p))]


def sample_words(box: CandidateBox, epsilon: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized batch of independent draws from one candidate box."""
    p = sampling_distribution(box.utilities, epsilon)
    idx = rng.choice(len(box.words), size=size, p=p)
    return np.array(box.words, dtype=object)[idx]


@dataclass(frozen=True)
class ObfuscationResult:
    """An obfuscated query plus per-token provenance and the stream that made it.

    Provenance kinds: ``replaced`` (target word swapped via the mechanism),
    ``kept-nontarget`` (in-vocabulary word outside the target tag gate), and
    ``kept-oov`` (word absent from the embedding vocabulary, passed through).
    """

    original: TaggedQuery
    obfuscated_tokens: tuple[str, ...]
    provenance: tuple[str, ...]
    stream: str = ""

    def __post_init__(self):
        if len(self.obfuscated_tokens) != len(self.original.tokens):
            raise ValueError("token count must be preserved by obfuscation")

    @property
    def text(self) -> str:
        return " ".join(self.obfuscated_tokens)

    def provenance_summary(self) -> str:
        counts = {REPLACED: 0, KEPT_NONTARGET: 0, KEPT_OOV: 0}
        for kind in self.provenance:
            counts[kind] += 1
        return ";".join(f"{kind}={counts[kind]}" for kind in (REPLACED, KEPT_NONTARGET, KEPT_OOV))


BoxCache = dict[tuple[str, str, int, int], CandidateBox]


def _box_for(
    probe: str,
    config: MechanismConfig,
    store: EmbeddingStore,
    cache: BoxCache | None,
) -> CandidateBox:
    if cache is None:
        return build_boxes(probe, config, store)
    key = (probe, config.measure.value, config.k, config.n)
    box = cache.get(key)
    if box is None:
        box = build_boxes(probe, config, store)
        cache[key] = box
    return box


def obfuscate_query(
    tagged: TaggedQuery,
    config: MechanismConfig,
    store: EmbeddingStore,
    rng: np.random.Generator,
    stream: str = "",
    box_cache: BoxCache | None = None,
) -> ObfuscationResult:
    """Replace every target token by a candidate-box draw; copy the rest.

    Boxes depend only on (probe, measure, k, n), so a shared ``box_cache``
    dict lets batches and epsilon sweeps reuse the ranking work safely.
    """
    out: list[str] = []
    provenance: list[str] = []
    for token in tagged.tokens:
        if token.target:
            box = _box_for(token.surface, config, store, box_cache)
            out.append(sample_word(box, config.epsilon, rng))
            provenance.append(REPLACED)
        else:
            out.append(token.surface)
            provenance.append(KEPT_NONTARGET if token.in_vocab else KEPT_OOV)
    return ObfuscationResult(
        original=tagged,
        obfuscated_tokens=tuple(out),
        provenance=tuple(provenance),
        stream=stream,
    )


def obfuscate_batch(
    tagged: TaggedQuery,
    config: MechanismConfig,
    store: EmbeddingStore,
    count: int,
    base_seed: int,
    query_key: str = "",
    box_cache: BoxCache | None = None,
) -> list[ObfuscationResult]:
    """`count` independent obfuscations from per-replicate derived streams.

    Replicate i draws from the stream (base_seed, query_key, i); reruns with
    the same seed reproduce the batch exactly, in any execution order.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    results = []
    for i in range(count):
        rng = derive_rng(base_seed, query_key, i)
        results.append(
            obfuscate_query(
                tagged,
                config,
                store,
                rng,
                stream=stream_name(base_seed, query_key, i),
                box_cache=box_cache,
            )
        )
    return results


def word_sampler(
    config: MechanismConfig,
    store: EmbeddingStore,
    box_cache: BoxCache | None = None,
) -> Callable[[str, np.random.Generator, int], np.ndarray]:
    """Adapter for the privacy estimators: (word, rng, count) -> output words."""

    def sampler(word: str, rng: np.random.Generator, size: int) -> np.ndarray:
        box = _box_for(word, config, store, box_cache)
        return sample_words(box, config.epsilon, rng, size)

    return sampler
