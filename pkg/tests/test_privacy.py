import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from queryblend.embeddings import EmbeddingStore, SimilarityMeasure
from queryblend.preprocess import TagLexicon, prepare_query
from queryblend.privacy import (
    PrivacyRecord,
    UndefinedSimilarityError,
    estimate_failure_rate,
    estimate_support_size,
    evaluate_result,
    jaccard,
    semantic_similarity,
    summarize_records,
    target_jaccard,
)
from queryblend.streams import derive_rng
from queryblend.wbb import MechanismConfig, obfuscate_query, word_sampler


class TestJaccard:
    def test_identical(self):
        assert jaccard({"a", "b"}, {"a", "b"}) == 1.0

    def test_disjoint(self):
        assert jaccard({"a"}, {"b"}) == 0.0

    def test_half_overlap(self):
        assert jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5

    def test_both_empty_convention(self):
        assert jaccard(set(), set()) == 1.0

    def test_one_empty(self):
        assert jaccard({"a"}, set()) == 0.0

    @given(st.sets(st.text(max_size=3), max_size=8), st.sets(st.text(max_size=3), max_size=8))
    def test_bounded_and_symmetric(self, a, b):
        value = jaccard(a, b)
        assert 0.0 <= value <= 1.0
        assert value == jaccard(b, a)


class TestSemanticSimilarity:
    def test_self_similarity(self, toy_store):
        assert semantic_similarity(["a", "b"], ["a", "b"], toy_store) == pytest.approx(1.0)

    def test_orthogonal_single_words(self, toy_store):
        assert semantic_similarity(["wstar"], ["c"], toy_store) == pytest.approx(0.0)

    def test_matches_pooled_oracle(self, toy_store):
        import math

        va = [(1.0 + 0.99) / 2, (0.0 + 0.1) / 2]
        vb = [(0.7 + 0.0) / 2, (0.7 + 1.0) / 2]
        dot = va[0] * vb[0] + va[1] * vb[1]
        oracle = dot / (math.hypot(*va) * math.hypot(*vb))
        assert semantic_similarity(["wstar", "a"], ["b", "c"], toy_store) == pytest.approx(oracle, abs=1e-9)

    def test_symmetry(self, toy_store):
        ab = semantic_similarity(["wstar", "b"], ["c", "d"], toy_store)
        ba = semantic_similarity(["c", "d"], ["wstar", "b"], toy_store)
        assert ab == pytest.approx(ba, abs=1e-12)

    def test_oov_tokens_ignored(self, toy_store):
        with_oov = semantic_similarity(["wstar", "zzz"], ["b"], toy_store)
        without = semantic_similarity(["wstar"], ["b"], toy_store)
        assert with_oov == pytest.approx(without)

    def test_no_known_words_errors(self, toy_store):
        with pytest.raises(UndefinedSimilarityError):
            semantic_similarity(["zzz"], ["b"], toy_store)


def constant_mechanism(output):
    def mechanism(word, rng, size):
        return np.full(size, output, dtype=object)

    return mechanism


class TestFailureRate:
    def test_wbb_with_safe_box_is_exactly_zero(self, tiny_store):
        cfg = MechanismConfig(k=1, n=10, epsilon=5.0)
        sampler = word_sampler(cfg, tiny_store, box_cache={})
        for word in ("treatment", "garlic", "orbit"):
            rate = estimate_failure_rate(word, sampler, trials=2000, rng=derive_rng(1, word))
            assert rate == 0.0

    def test_forced_single_candidate(self):
        rate = estimate_failure_rate("w", constant_mechanism("x"), trials=50, rng=derive_rng(2))
        assert rate == 0.0

    def test_identity_mechanism_rate_one(self):
        rate = estimate_failure_rate("w", constant_mechanism("w"), trials=50, rng=derive_rng(3))
        assert rate == 1.0

    def test_cmp_high_epsilon_rate_above_09(self, tiny_store):
        from queryblend.baselines import NoiseMechanismConfig, baseline_word_sampler

        sampler = baseline_word_sampler(NoiseMechanismConfig(epsilon=1e4, variant="cmp"), tiny_store)
        rate = estimate_failure_rate("treatment", sampler, trials=1000, rng=derive_rng(4))
        assert rate > 0.9

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            estimate_failure_rate("w", constant_mechanism("w"), trials=0, rng=derive_rng(5))


class TestSupportSize:
    def test_uniform_box_needs_all_candidates(self, tiny_store):
        cfg = MechanismConfig(k=1, n=6, epsilon=0.0)
        sampler = word_sampler(cfg, tiny_store, box_cache={})
        size = estimate_support_size("treatment", sampler, eta=0.01, trials=20_000, rng=derive_rng(6))
        assert size == 6

    def test_single_candidate(self, tiny_store):
        cfg = MechanismConfig(k=1, n=1, epsilon=3.0)
        sampler = word_sampler(cfg, tiny_store, box_cache={})
        assert estimate_support_size("skin", sampler, eta=0.05, trials=2000, rng=derive_rng(7)) == 1

    def test_heavy_head_distribution(self):
        def mechanism(word, rng, size):
            return np.where(rng.random(size) < 0.99, "x", "y").astype(object)

        size = estimate_support_size("w", mechanism, eta=0.05, trials=4000, rng=derive_rng(8))
        assert size == 1

    def test_eta_and_trials_validation(self):
        with pytest.raises(ValueError):
            estimate_support_size("w", constant_mechanism("x"), eta=0.0, trials=1000, rng=derive_rng(9))
        with pytest.raises(ValueError):
            estimate_support_size("w", constant_mechanism("x"), eta=0.05, trials=100, rng=derive_rng(10))


class TestRecords:
    def test_target_jaccard_zero_when_replacements_fresh(self, tiny_store, lexicon):
        tagged = prepare_query("the treatment", tiny_store, lexicon)
        cfg = MechanismConfig(k=2, n=10, epsilon=10.0)
        result = obfuscate_query(tagged, cfg, tiny_store, derive_rng(11))
        assert target_jaccard(result) == 0.0

    def test_evaluate_result_fields(self, tiny_store, lexicon):
        tagged = prepare_query("treatment for skin cancer", tiny_store, lexicon)
        cfg = MechanismConfig(k=2, n=10, epsilon=10.0)
        result = obfuscate_query(tagged, cfg, tiny_store, derive_rng(12))
        record = evaluate_result("q1", "wbb", 10.0, 0, tagged, result, tiny_store)
        assert record.query_id == "q1"
        assert 0.0 <= record.jaccard <= 1.0
        assert -1.0 <= record.semantic <= 1.0
        # "for" is kept verbatim, so full-query overlap is at least 1/|union|
        assert record.jaccard > 0.0

    def test_summaries_group_by_mechanism_and_epsilon(self):
        records = [
            PrivacyRecord("q1", "wbb", 1.0, 0, 0.0, 0.0, 0.4),
            PrivacyRecord("q2", "wbb", 1.0, 0, 0.2, 0.0, 0.6),
            PrivacyRecord("q1", "cmp", 1.0, 0, 1.0, 1.0, 1.0),
        ]
        summaries = summarize_records(records)
        assert [(s.mechanism, s.count) for s in summaries] == [("wbb", 2), ("cmp", 1)]
        wbb_summary = summaries[0]
        assert wbb_summary.mean_jaccard == pytest.approx(0.1)
        assert wbb_summary.mean_semantic == pytest.approx(0.5)


def test_semantic_similarity_stable_across_epsilon_small_scale(tiny_store, lexicon):
    """Mean pooled-cosine similarity should barely move across budgets."""
    queries = [f"the {w}" for w in ("treatment", "garlic", "orbit", "guitar", "stadium")]
    cache = {}
    means = []
    for eps in (1.0, 5.0, 10.0, 50.0):
        cfg = MechanismConfig(k=2, n=15, epsilon=eps, measure=SimilarityMeasure.ANGLE)
        values = []
        for qi, text in enumerate(queries):
            tagged = prepare_query(text, tiny_store, lexicon)
            for rep in range(30):
                result = obfuscate_query(tagged, cfg, tiny_store, derive_rng(13, qi, rep, eps), box_cache=cache)
                values.append(
                    semantic_similarity(tagged.surfaces, result.obfuscated_tokens, tiny_store)
                )
        means.append(float(np.mean(values)))
    assert max(means) - min(means) < 0.05
