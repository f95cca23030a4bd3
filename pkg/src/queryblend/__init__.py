"""Differentially private query obfuscation and a desk-scale retrieval harness.

The toolkit covers the full loop: normalize a query, pick obfuscation
targets, replace them with a safe-box exponential-mechanism draw (or a
noise-addition baseline), send the replicates through lexical and embedding
scorers, pool and rerank on the user side, and measure both privacy
(Jaccard, pooled-cosine similarity, failure rate, support size) and utility
(pooled recall, nDCG@10).
"""

from .baselines import (
    NoiseMechanismConfig,
    baseline_obfuscate_query,
    cmp_obfuscate_word,
    mahalanobis_obfuscate_word,
)
from .embeddings import (
    EmbeddingFormatError,
    EmbeddingStore,
    OutOfVocabularyError,
    SimilarityMeasure,
    cosine_similarity,
    euclidean_distance,
    load_embeddings,
    rank_by_similarity,
)
from .preprocess import TagLexicon, TaggedQuery, normalize_and_tokenize, prepare_query, tag_targets
from .privacy import (
    estimate_failure_rate,
    estimate_support_size,
    jaccard,
    semantic_similarity,
)
from .retrieval import (
    IndexedCorpus,
    RelevanceJudgments,
    RunList,
    bm25_search,
    build_index,
    embedding_search,
    ndcg_at,
    pool_runs,
    pooled_recall,
    rerank,
    tfidf_search,
)
from .wbb import (
    CandidateBox,
    MechanismConfig,
    ObfuscationResult,
    build_boxes,
    obfuscate_batch,
    obfuscate_query,
    sample_word,
    sampling_distribution,
    utility,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateBox",
    "EmbeddingFormatError",
    "EmbeddingStore",
    "IndexedCorpus",
    "MechanismConfig",
    "NoiseMechanismConfig",
    "ObfuscationResult",
    "OutOfVocabularyError",
    "RelevanceJudgments",
    "RunList",
    "SimilarityMeasure",
    "TagLexicon",
    "TaggedQuery",
    "baseline_obfuscate_query",
    "bm25_search",
    "build_boxes",
    "build_index",
    "cmp_obfuscate_word",
    "cosine_similarity",
    "embedding_search",
    "estimate_failure_rate",
    "estimate_support_size",
    "euclidean_distance",
    "jaccard",
    "load_embeddings",
    "mahalanobis_obfuscate_word",
    "ndcg_at",
    "normalize_and_tokenize",
    "obfuscate_batch",
    "obfuscate_query",
    "pool_runs",
    "pooled_recall",
    "prepare_query",
    "rank_by_similarity",
    "rerank",
    "sample_word",
    "sampling_distribution",
    "semantic_similarity",
    "tag_targets",
    "tfidf_search",
    "utility",
]
