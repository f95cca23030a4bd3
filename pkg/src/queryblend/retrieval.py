"""Desk-scale retrieval: inverted index, three scorers, pooling, and metrics.

Lexical scoring offers BM25 (k1/b parameters, idf = ln(1 + (N-df+0.5)/(df+0.5))
so scores stay non-negative) and a vector-space model with SMART ltc weights
((1+ln tf) * ln(N/df), cosine-normalized, natural logs). The dense scorer
ranks documents by cosine between mean-pooled word embeddings. Runs, qrels,
and run files follow the TREC conventions.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingStore
from .preprocess import normalize_and_tokenize

SCORERS = ("bm25", "tfidf", "embedding")


class UndefinedMetricError(ValueError):
    """Raised when a metric has no denominator (e.g. no relevant documents)."""


@dataclass(frozen=True)
class RunList:
    """A ranked retrieval result: (doc id, score) pairs, best first.

    Ranks are implicit and contiguous from 1; scores must be non-increasing
    and doc ids unique.
    """

    query_id: str
    entries: tuple[tuple[str, float], ...]
    tag: str = "run"

    def __post_init__(self):
        seen = set()
        previous = math.inf
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise ValueError(f"duplicate doc id {doc_id!r} in run for {self.query_id!r}")
            seen.add(doc_id)
            if score > previous:
                raise ValueError(f"scores must be non-increasing in run for {self.query_id!r}")
            previous = score

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def ranked(self) -> list[tuple[int, str, float]]:
        return [(rank, doc_id, score) for rank, (doc_id, score) in enumerate(self.entries, start=1)]

    def __len__(self) -> int:
        return len(self.entries)


class IndexedCorpus:
    """Inverted index plus the statistics the scorers need.

    Postings are (doc id, term frequency) pairs sorted by doc id; document
    frequency is the postings length. When built with an embedding store the
    index also carries one mean-pooled vector per document (documents with
    no in-vocabulary tokens have none and are skipped by the dense scorer).
    """

    def __init__(self, doc_tokens: dict[str, list[str]], store: EmbeddingStore | None = None):
        if not doc_tokens:
            raise ValueError("cannot index an empty corpus")
        self.doc_ids: tuple[str, ...] = tuple(doc_tokens)
        self.doc_tokens = {d: list(tokens) for d, tokens in doc_tokens.items()}
        self.doc_length = {d: len(tokens) for d, tokens in self.doc_tokens.items()}
        self.avg_doc_length = sum(self.doc_length.values()) / len(self.doc_ids)

        postings: dict[str, dict[str, int]] = {}
        for doc_id in self.doc_ids:
            for term, tf in Counter(self.doc_tokens[doc_id]).items():
                postings.setdefault(term, {})[doc_id] = tf
        self.postings: dict[str, tuple[tuple[str, int], ...]] = {
            term: tuple(sorted(by_doc.items())) for term, by_doc in postings.items()
        }

        n = len(self.doc_ids)
        self._ltc_norms: dict[str, float] = {d: 0.0 for d in self.doc_ids}
        for term, plist in self.postings.items():
            idf = math.log(n / len(plist))
            for doc_id, tf in plist:
                weight = (1.0 + math.log(tf)) * idf
                self._ltc_norms[doc_id] += weight * weight
        self._ltc_norms = {d: math.sqrt(v) for d, v in self._ltc_norms.items()}

        self.doc_vectors: dict[str, np.ndarray] = {}
        if store is not None:
            for doc_id in self.doc_ids:
                vectors = [store.vector(t) for t in self.doc_tokens[doc_id] if t in store]
                if vectors:
                    self.doc_vectors[doc_id] = np.mean(vectors, axis=0)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def __len__(self) -> int:
        return len(self.doc_ids)


def build_index(corpus: Iterable[tuple[str, str]], store: EmbeddingStore | None = None) -> IndexedCorpus:
    """Normalize and index a stream of (doc id, text) pairs."""
    doc_tokens: dict[str, list[str]] = {}
    for doc_id, text in corpus:
        if doc_id in doc_tokens:
            raise ValueError(f"duplicate doc id {doc_id!r}")
        doc_tokens[doc_id] = normalize_and_tokenize(text)
    return IndexedCorpus(doc_tokens, store=store)


def _top_run(query_id: str, scores: dict[str, float], top: int, tag: str) -> RunList:
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:top]
    return RunList(query_id=query_id, entries=tuple(ordered), tag=tag)


def bm25_search(
    index: IndexedCorpus,
    query_tokens: Sequence[str],
    k1: float = 1.2,
    b: float = 0.75,
    top: int = 100,
    query_id: str = "",
    tag: str = "bm25",
) -> RunList:
    """BM25 ranking; repeated query terms weight linearly, zero scores drop out."""
    if k1 <= 0:
        raise ValueError("k1 must be positive")
    if not 0.0 <= b <= 1.0:
        raise ValueError("b must lie in [0, 1]")
    n = len(index)
    scores: dict[str, float] = {}
    for term, qtf in Counter(query_tokens).items():
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for doc_id, tf in plist:
            denom = tf + k1 * (1.0 - b + b * index.doc_length[doc_id] / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + qtf * idf * tf * (k1 + 1.0) / denom
    scores = {d: s for d, s in scores.items() if s > 0.0}
    return _top_run(query_id, scores, top, tag)


def tfidf_search(
    index: IndexedCorpus,
    query_tokens: Sequence[str],
    top: int = 100,
    query_id: str = "",
    tag: str = "tfidf",
) -> RunList:
    """Cosine of ltc-weighted tf-idf vectors between query and documents."""
    n = len(index)
    query_weights: dict[str, float] = {}
    for term, qtf in Counter(query_tokens).items():
        df = index.df(term)
        if df == 0:
            continue
        query_weights[term] = (1.0 + math.log(qtf)) * math.log(n / df)
    query_norm = math.sqrt(sum(w * w for w in query_weights.values()))
    if query_norm == 0.0:
        return RunList(query_id=query_id, entries=(), tag=tag)
    dots: dict[str, float] = {}
    for term, wq in query_weights.items():
        idf = math.log(n / index.df(term))
        for doc_id, tf in index.postings[term]:
            wd = (1.0 + math.log(tf)) * idf
            dots[doc_id] = dots.get(doc_id, 0.0) + wq * wd
    scores = {
        d: dot / (query_norm * index._ltc_norms[d])
        for d, dot in dots.items()
        if dot > 0.0 and index._ltc_norms[d] > 0.0
    }
    return _top_run(query_id, scores, top, tag)


def embedding_search(
    index: IndexedCorpus,
    query_tokens: Sequence[str],
    store: EmbeddingStore,
    top: int = 100,
    query_id: str = "",
    tag: str = "embedding",
) -> RunList:
    """Rank documents by cosine between mean-pooled query and document vectors."""
    vectors = [store.vector(t) for t in query_tokens if t in store]
    if not vectors:
        raise ValueError("no in-vocabulary query tokens for embedding search")
    query_vec = np.mean(vectors, axis=0)
    query_norm = np.linalg.norm(query_vec)
    if query_norm == 0.0:
        raise ValueError("pooled query vector is zero")
    scores: dict[str, float] = {}
    for doc_id, doc_vec in index.doc_vectors.items():
        doc_norm = np.linalg.norm(doc_vec)
        if doc_norm == 0.0:
            continue
        scores[doc_id] = float(np.dot(query_vec, doc_vec) / (query_norm * doc_norm))
    return _top_run(query_id, scores, top, tag)


def pool_runs(runs: Sequence[RunList]) -> set[str]:
    """Union of the documents retrieved by runs for one query."""
    if not runs:
        return set()
    query_ids = {run.query_id for run in runs}
    if len(query_ids) > 1:
        raise ValueError(f"cannot pool runs for different queries: {sorted(query_ids)}")
    pooled: set[str] = set()
    for run in runs:
        pooled.update(run.doc_ids())
    return pooled


def rerank(
    pool: set[str],
    original_query_tokens: Sequence[str],
    store: EmbeddingStore,
    index: IndexedCorpus,
    query_id: str = "",
    tag: str = "rerank",
) -> RunList:
    """Order a pooled document set by embedding cosine against the original query.

    This models the user-side step, where the private query is safe to use.
    Pool members without a document vector cannot be scored and are dropped.
    """
    if not pool:
        return RunList(query_id=query_id, entries=(), tag=tag)
    vectors = [store.vector(t) for t in original_query_tokens if t in store]
    if not vectors:
        raise ValueError("no in-vocabulary tokens in the original query")
    query_vec = np.mean(vectors, axis=0)
    query_norm = np.linalg.norm(query_vec)
    scores: dict[str, float] = {}
    for doc_id in pool:
        doc_vec = index.doc_vectors.get(doc_id)
        if doc_vec is None:
            continue
        doc_norm = np.linalg.norm(doc_vec)
        if doc_norm == 0.0:
            continue
        scores[doc_id] = float(np.dot(query_vec, doc_vec) / (query_norm * doc_norm))
    return _top_run(query_id, scores, len(pool), tag)


class RelevanceJudgments:
    """Graded qrels: (query id, doc id) -> non-negative relevance."""

    def __init__(self, judgments: Mapping[tuple[str, str], int]):
        self._judgments: dict[tuple[str, str], int] = {}
        for (qid, doc_id), rel in judgments.items():
            if rel < 0:
                raise ValueError(f"negative relevance for ({qid}, {doc_id})")
            if (qid, doc_id) in self._judgments:
                raise ValueError(f"duplicate judgment for ({qid}, {doc_id})")
            self._judgments[(qid, doc_id)] = int(rel)

    def relevance(self, query_id: str, doc_id: str) -> int:
        return self._judgments.get((query_id, doc_id), 0)

    def relevant_docs(self, query_id: str) -> set[str]:
        return {doc for (qid, doc), rel in self._judgments.items() if qid == query_id and rel > 0}

    def graded(self, query_id: str) -> dict[str, int]:
        return {doc: rel for (qid, doc), rel in self._judgments.items() if qid == query_id and rel > 0}

    def query_ids(self) -> set[str]:
        return {qid for (qid, _), rel in self._judgments.items() if rel > 0}

    def __len__(self) -> int:
        return len(self._judgments)

    @classmethod
    def load(cls, path) -> "RelevanceJudgments":
        """Parse TREC qrels lines: ``<qid> 0 <docid> <rel>``."""
        judgments: dict[tuple[str, str], int] = {}
        path = Path(path)
        with path.open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 4:
                    raise ValueError(f"{path.name}:{lineno}: expected 4 fields")
                qid, _, doc_id, rel = parts
                if (qid, doc_id) in judgments:
                    raise ValueError(f"{path.name}:{lineno}: duplicate judgment for ({qid}, {doc_id})")
                judgments[(qid, doc_id)] = int(rel)
        return cls(judgments)


def recall(retrieved: Iterable[str], qrels: RelevanceJudgments, query_id: str) -> float:
    """|retrieved ∩ relevant| / |relevant|."""
    relevant = qrels.relevant_docs(query_id)
    if not relevant:
        raise UndefinedMetricError(f"no relevant documents for query {query_id!r}")
    return len(set(retrieved) & relevant) / len(relevant)


def pooled_recall(pool: set[str], qrels: RelevanceJudgments, query_id: str) -> float:
    return recall(pool, qrels, query_id)


def ndcg_at(run: RunList, qrels: RelevanceJudgments, cutoff: int = 10) -> float:
    """Normalized DCG with gains 2^rel - 1 and log2(rank + 1) discounts."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    graded = qrels.graded(run.query_id)
    if not graded:
        raise UndefinedMetricError(f"no relevant documents for query {run.query_id!r}")
    dcg = 0.0
    for rank, doc_id, _ in run.ranked()[:cutoff]:
        rel = graded.get(doc_id, 0)
        if rel > 0:
            dcg += (2.0**rel - 1.0) / math.log2(rank + 1)
    ideal = 0.0
    for position, rel in enumerate(sorted(graded.values(), reverse=True)[:cutoff], start=1):
        ideal += (2.0**rel - 1.0) / math.log2(position + 1)
    return dcg / ideal


def read_corpus(path) -> list[tuple[str, str]]:
    """Line-delimited JSON records with ``doc_id`` and ``text`` fields."""
    docs = []
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                docs.append((str(record["doc_id"]), str(record["text"])))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path.name}:{lineno}: bad corpus record ({exc})") from None
    return docs


def read_queries(path) -> list[tuple[str, str]]:
    """Tab-separated ``<qid>\\t<text>`` lines."""
    queries = []
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"{path.name}:{lineno}: expected '<qid>\\t<text>'")
            qid, text = line.split("\t", 1)
            queries.append((qid.strip(), text))
    return queries


def run_lines(run: RunList, tag: str | None = None) -> list[str]:
    """TREC run rows: ``<qid> Q0 <docid> <rank> <score> <tag>`` (6-decimal scores)."""
    label = tag if tag is not None else run.tag
    return [
        f"{run.query_id} Q0 {doc_id} {rank} {score:.6f} {label}"
        for rank, doc_id, score in run.ranked()
    ]


def write_run_file(path, runs: Sequence[RunList], tag: str | None = None) -> None:
    lines = []
    for run in runs:
        lines.extend(run_lines(run, tag))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
