import math

import numpy as np
import pytest

from queryblend import oracles
from queryblend.preprocess import normalize_and_tokenize
from queryblend.retrieval import (
    RelevanceJudgments,
    RunList,
    UndefinedMetricError,
    bm25_search,
    build_index,
    embedding_search,
    ndcg_at,
    pool_runs,
    pooled_recall,
    read_corpus,
    read_queries,
    rerank,
    run_lines,
    tfidf_search,
)

from conftest import FIXTURES


@pytest.fixture(scope="module")
def corpus_docs():
    return read_corpus(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="module")
def index(corpus_docs, tiny_store):
    return build_index(corpus_docs, store=tiny_store)


@pytest.fixture(scope="module")
def doc_tokens(corpus_docs):
    return {doc_id: normalize_and_tokenize(text) for doc_id, text in corpus_docs}


@pytest.fixture(scope="module")
def qrels():
    return RelevanceJudgments.load(FIXTURES / "qrels.txt")


TEST_QUERIES = [
    ["treatment", "skin", "cancer"],
    ["garlic", "bread"],
    ["guitar", "concert", "the"],
    ["orbit"],
    ["treatment", "treatment", "cancer"],  # repeated query term
]


class TestRunList:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            RunList("q", (("d1", 1.0), ("d1", 0.5)))

    def test_rejects_increasing_scores(self):
        with pytest.raises(ValueError, match="non-increasing"):
            RunList("q", (("d1", 1.0), ("d2", 2.0)))

    def test_ranked_rows(self):
        run = RunList("q", (("d1", 2.0), ("d2", 1.0)))
        assert run.ranked() == [(1, "d1", 2.0), (2, "d2", 1.0)]


class TestBuildIndex:
    def test_disjoint_docs_have_singleton_postings(self):
        index = build_index([("d1", "apple pear"), ("d2", "orange kiwi")])
        assert all(len(plist) == 1 for plist in index.postings.values())

    def test_empty_corpus_errors(self):
        with pytest.raises(ValueError, match="empty"):
            build_index([])

    def test_duplicate_doc_id_errors(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_index([("d1", "a"), ("d1", "b")])

    def test_statistics_match_recount(self, index, doc_tokens):
        # document frequency and term frequency against a from-scratch recount
        for term, plist in index.postings.items():
            docs_with_term = [d for d, tokens in doc_tokens.items() if term in tokens]
            assert sorted(docs_with_term) == [d for d, _ in plist]
            for doc_id, tf in plist:
                assert tf == sum(1 for t in doc_tokens[doc_id] if t == term)
        assert index.avg_doc_length == pytest.approx(
            sum(len(t) for t in doc_tokens.values()) / len(doc_tokens)
        )

    def test_postings_sorted_by_doc_id(self, index):
        for plist in index.postings.values():
            ids = [d for d, _ in plist]
            assert ids == sorted(ids)


class TestBM25:
    def test_unmatched_query_gives_empty_run(self, index):
        assert len(bm25_search(index, ["xylophone"], query_id="q")) == 0

    def test_single_match_ranks_first(self):
        index = build_index([("d1", "apple pear"), ("d2", "orange kiwi")])
        run = bm25_search(index, ["apple"], query_id="q")
        assert run.doc_ids() == ["d1"]

    @pytest.mark.parametrize("query", TEST_QUERIES)
    def test_matches_brute_force_oracle(self, index, doc_tokens, query):
        run = bm25_search(index, query, k1=1.2, b=0.75, top=100, query_id="q")
        expected = oracles.naive_bm25_scores(doc_tokens, query, k1=1.2, b=0.75)
        assert set(run.doc_ids()) == set(expected)
        for doc_id, score in run.entries:
            assert score == pytest.approx(expected[doc_id], abs=1e-9)

    def test_tie_break_by_doc_id(self):
        index = build_index([("zz", "apple"), ("aa", "apple")])
        run = bm25_search(index, ["apple"], query_id="q")
        assert run.doc_ids() == ["aa", "zz"]

    def test_parameter_validation(self, index):
        with pytest.raises(ValueError):
            bm25_search(index, ["a"], k1=0.0)
        with pytest.raises(ValueError):
            bm25_search(index, ["a"], b=1.5)


class TestTfidf:
    def test_document_as_query_ranks_itself_first(self, index, doc_tokens):
        doc_id = "cooking-2"
        run = tfidf_search(index, doc_tokens[doc_id], query_id="q")
        assert run.doc_ids()[0] == doc_id

    def test_no_shared_terms_empty(self, index):
        assert len(tfidf_search(index, ["xylophone"], query_id="q")) == 0

    @pytest.mark.parametrize("query", TEST_QUERIES)
    def test_matches_dense_cosine_oracle(self, index, doc_tokens, query):
        run = tfidf_search(index, query, top=100, query_id="q")
        expected = oracles.naive_tfidf_scores(doc_tokens, query)
        assert set(run.doc_ids()) == set(expected)
        for doc_id, score in run.entries:
            assert score == pytest.approx(expected[doc_id], abs=1e-9)


class TestEmbeddingSearch:
    def test_exact_document_text_ranks_first(self, index, doc_tokens, tiny_store):
        doc_id = "music-3"
        run = embedding_search(index, doc_tokens[doc_id], tiny_store, query_id="q")
        assert run.doc_ids()[0] == doc_id

    def test_top_larger_than_corpus_ranks_everything(self, index, tiny_store):
        run = embedding_search(index, ["treatment"], tiny_store, top=10_000, query_id="q")
        assert len(run) == len(index)

    def test_no_vocab_tokens_errors(self, index, tiny_store):
        with pytest.raises(ValueError, match="in-vocabulary"):
            embedding_search(index, ["xyzzy"], tiny_store, query_id="q")

    @pytest.mark.parametrize("query", TEST_QUERIES)
    def test_matches_cosine_oracle(self, index, doc_tokens, tiny_store, query):
        run = embedding_search(index, query, tiny_store, top=100, query_id="q")
        expected = oracles.naive_embedding_scores(doc_tokens, query, tiny_store)
        assert set(run.doc_ids()) == set(expected)
        for doc_id, score in run.entries:
            assert score == pytest.approx(expected[doc_id], abs=1e-9)


class TestPooling:
    def test_identical_runs_idempotent(self):
        run = RunList("q", (("d1", 2.0), ("d2", 1.0)))
        assert pool_runs([run, run]) == {"d1", "d2"}

    def test_disjoint_union(self):
        a = RunList("q", (("d1", 3.0), ("d2", 2.0), ("d3", 1.0)))
        b = RunList("q", (("d4", 3.0), ("d5", 2.0), ("d6", 1.5), ("d7", 1.0)))
        assert len(pool_runs([a, b])) == 7

    def test_mixed_query_ids_error(self):
        a = RunList("q1", (("d1", 1.0),))
        b = RunList("q2", (("d1", 1.0),))
        with pytest.raises(ValueError, match="different queries"):
            pool_runs([a, b])

    def test_many_runs_match_set_oracle(self, index, tiny_store):
        rng = np.random.default_rng(2)
        vocab = [t for t in index.postings]
        runs = []
        expected = set()
        for _ in range(20):
            query = list(rng.choice(vocab, size=3))
            run = bm25_search(index, query, top=100, query_id="q")
            runs.append(run)
            expected |= set(run.doc_ids())
        assert pool_runs(runs) == expected


class TestRerank:
    def test_pool_of_one(self, index, tiny_store):
        run = rerank({"medical-1"}, ["treatment"], tiny_store, index, query_id="q")
        assert run.doc_ids() == ["medical-1"]

    def test_exact_text_doc_ranks_first(self, index, doc_tokens, tiny_store):
        pool = set(index.doc_ids)
        run = rerank(pool, doc_tokens["space-1"], tiny_store, index, query_id="q")
        assert run.doc_ids()[0] == "space-1"

    def test_empty_pool_gives_empty_run(self, index, tiny_store):
        assert len(rerank(set(), ["treatment"], tiny_store, index, query_id="q")) == 0

    def test_matches_cosine_sort_oracle(self, index, doc_tokens, tiny_store):
        pool = {"medical-1", "space-2", "cooking-3", "music-4", "sports-1"}
        run = rerank(pool, ["treatment", "skin"], tiny_store, index, query_id="q")
        scores = oracles.naive_embedding_scores(
            {d: doc_tokens[d] for d in pool}, ["treatment", "skin"], tiny_store
        )
        assert [d for d, _ in oracles.rank_scores(scores, len(pool))] == run.doc_ids()


class TestQrels:
    def test_load_and_lookup(self, qrels):
        assert qrels.relevance("q1", "medical-1") == 2
        assert qrels.relevance("q1", "space-9") == 0
        assert qrels.relevant_docs("q1") == {"medical-1", "medical-2", "medical-3", "medical-4"}

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("q1 0 d1 1\nq1 0 d1 2\n")
        with pytest.raises(ValueError, match="duplicate"):
            RelevanceJudgments.load(path)

    def test_judged_zero_not_relevant(self, qrels):
        assert "space-1" not in qrels.relevant_docs("q1")


class TestRecall:
    def test_full_coverage(self, qrels):
        pool = {"medical-1", "medical-2", "medical-3", "medical-4", "space-1"}
        assert pooled_recall(pool, qrels, "q1") == 1.0

    def test_no_overlap(self, qrels):
        assert pooled_recall({"space-1"}, qrels, "q1") == 0.0

    def test_half(self, qrels):
        assert pooled_recall({"medical-1", "medical-3", "cooking-1"}, qrels, "q1") == 0.5

    def test_undefined_without_relevant_docs(self, qrels):
        with pytest.raises(UndefinedMetricError):
            pooled_recall({"medical-1"}, qrels, "q-unknown")


class TestNdcg:
    def make_qrels(self, pairs):
        return RelevanceJudgments(dict(pairs))

    def test_single_relevant_at_rank_one(self):
        qrels = self.make_qrels({("q", "d1"): 1})
        run = RunList("q", (("d1", 2.0), ("d2", 1.0)))
        assert ndcg_at(run, qrels, 10) == 1.0

    def test_single_relevant_at_rank_two(self):
        qrels = self.make_qrels({("q", "d1"): 1})
        run = RunList("q", (("d2", 2.0), ("d1", 1.0)))
        assert ndcg_at(run, qrels, 10) == pytest.approx(1.0 / math.log2(3), abs=1e-12)
        assert ndcg_at(run, qrels, 10) == pytest.approx(0.6309, abs=1e-4)

    def test_relevant_outside_cutoff(self):
        qrels = self.make_qrels({("q", "d9"): 1})
        entries = tuple((f"d{i}", float(20 - i)) for i in range(10))  # d0..d9, rank 10 is d9
        run = RunList("q", entries[:9] + (("dx", 1.0), ("d9", 0.5)))
        assert ndcg_at(run, qrels, 10) == 0.0

    def test_graded_gains(self):
        qrels = self.make_qrels({("q", "d1"): 2, ("q", "d2"): 1})
        run = RunList("q", (("d2", 2.0), ("d1", 1.0)))
        expected = (1.0 / math.log2(2) + 3.0 / math.log2(3)) / (3.0 / math.log2(2) + 1.0 / math.log2(3))
        assert ndcg_at(run, qrels, 10) == pytest.approx(expected, abs=1e-12)

    def test_invariant_under_positive_affine_score_rescale(self, index, qrels, tiny_store):
        run = embedding_search(index, ["treatment", "cancer"], tiny_store, query_id="q1")
        rescaled = RunList("q1", tuple((d, 3.5 * s + 11.0) for d, s in run.entries), run.tag)
        assert ndcg_at(run, qrels, 10) == ndcg_at(rescaled, qrels, 10)

    def test_matches_naive_oracle(self, index, qrels, doc_tokens, tiny_store):
        for qid, tokens in [("q1", ["treatment", "cancer"]), ("q4", ["guitar", "melody"])]:
            run = embedding_search(index, tokens, tiny_store, query_id=qid)
            expected = oracles.naive_ndcg_at(run.doc_ids(), qrels.graded(qid), 10)
            assert ndcg_at(run, qrels, 10) == pytest.approx(expected, abs=1e-12)

    def test_undefined_without_relevant(self):
        qrels = self.make_qrels({})
        run = RunList("q", (("d1", 1.0),))
        with pytest.raises(UndefinedMetricError):
            ndcg_at(run, qrels, 10)


class TestIO:
    def test_read_queries(self):
        queries = read_queries(FIXTURES / "queries.tsv")
        assert queries[0] == ("q1", "treatment for skin cancer")
        assert len(queries) == 5

    def test_corpus_parse_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"doc_id": "d1"}\n')
        with pytest.raises(ValueError, match="corpus.jsonl:1"):
            read_corpus(path)

    def test_run_lines_format(self):
        run = RunList("q1", (("d1", 1.23456789), ("d2", 0.5)), tag="mytag")
        lines = run_lines(run)
        assert lines[0] == "q1 Q0 d1 1 1.234568 mytag"
        assert lines[1] == "q1 Q0 d2 2 0.500000 mytag"


def test_pooled_recall_dominates_every_member_run(index, qrels, tiny_store, doc_tokens):
    from queryblend.retrieval import recall

    rng = np.random.default_rng(9)
    vocab = [t for t in index.postings]
    for qid in ("q1", "q3", "q5"):
        runs = [
            bm25_search(index, list(rng.choice(vocab, size=3)), top=5, query_id=qid)
            for _ in range(8)
        ]
        pool = pool_runs(runs)
        pooled = pooled_recall(pool, qrels, qid)
        for run in runs:
            assert pooled >= recall(run.doc_ids(), qrels, qid) - 1e-12
