import pytest
from hypothesis import given
from hypothesis import strategies as st

from queryblend.embeddings import EmbeddingStore
from queryblend.preprocess import (
    TagLexicon,
    normalize_and_tokenize,
    prepare_query,
    tag_targets,
)


@pytest.fixture(scope="module")
def small_store():
    return EmbeddingStore.from_pairs(
        [
            ("treatment", [1.0, 0.0]),
            ("skin", [0.0, 1.0]),
            ("cancer", [1.0, 1.0]),
            ("for", [0.5, 0.5]),
        ]
    )


@pytest.fixture(scope="module")
def small_lexicon():
    return TagLexicon(
        tags={"treatment": "noun", "skin": "noun", "cancer": "noun", "for": "other"},
        stopwords=frozenset({"for", "the"}),
    )


class TestNormalize:
    def test_example_query(self):
        assert normalize_and_tokenize("Treatment for Skin Cancer") == ["treatment", "for", "skin", "cancer"]

    def test_empty_input(self):
        assert normalize_and_tokenize("") == []
        assert normalize_and_tokenize("   \t ") == []

    def test_punctuation_split(self):
        assert normalize_and_tokenize("COVID-19?") == ["covid", "19"]

    def test_punctuation_only_tokens_dropped(self):
        assert normalize_and_tokenize("?! ... --") == []

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_and_tokenize(text)
        again = normalize_and_tokenize(" ".join(once))
        assert once == again


class TestTagging:
    def test_targets_from_lexicon(self, small_store, small_lexicon):
        tagged = tag_targets(["treatment", "for", "skin", "cancer"], small_store, small_lexicon)
        assert tagged.target_surfaces == ("treatment", "skin", "cancer")
        by_surface = {t.surface: t for t in tagged.tokens}
        assert not by_surface["for"].target

    def test_all_stopwords_means_no_targets(self, small_store, small_lexicon):
        tagged = tag_targets(["for", "for"], small_store, small_lexicon)
        assert tagged.target_surfaces == ()

    def test_oov_is_never_a_target(self, small_store, small_lexicon):
        tagged = tag_targets(["melanoma"], small_store, small_lexicon)
        (token,) = tagged.tokens
        assert not token.target and not token.in_vocab

    def test_unknown_in_vocab_word_defaults_to_target(self, small_lexicon):
        store = EmbeddingStore.from_pairs([("mystery", [1.0, 2.0])])
        tagged = tag_targets(["mystery"], store, small_lexicon)
        assert tagged.tokens[0].target

    def test_token_count_preserved(self, small_store, small_lexicon):
        tokens = ["treatment", "melanoma", "for", "skin"]
        tagged = tag_targets(tokens, small_store, small_lexicon)
        assert len(tagged.tokens) == len(tokens)
        assert tagged.normalized == " ".join(tokens)

    def test_prepare_query_keeps_raw_text(self, small_store, small_lexicon):
        tagged = prepare_query("Treatment for Skin!", small_store, small_lexicon)
        assert tagged.original_text == "Treatment for Skin!"
        assert tagged.normalized == "treatment for skin"

    def test_custom_target_tags(self, small_store):
        verbs_too = TagLexicon(tags={"treatment": "verb"}, target_tags=frozenset({"verb"}), default_tag="other")
        tagged = tag_targets(["treatment", "skin"], small_store, verbs_too)
        assert tagged.target_surfaces == ("treatment",)


class TestLexiconIO:
    def test_load_files(self, tmp_path):
        tag_path = tmp_path / "tags.txt"
        tag_path.write_text("# comment\ncat noun\nfast adjective\nrun verb\n")
        stop_path = tmp_path / "stop.txt"
        stop_path.write_text("the\nfor\n")
        lexicon = TagLexicon.load(tag_path, stopwords_path=stop_path)
        assert lexicon.tag("cat") == "noun"
        assert lexicon.is_target("cat")
        assert not lexicon.is_target("run")
        assert not lexicon.is_target("the")
        assert lexicon.is_target("unseen")  # unknown defaults to noun

    def test_malformed_line(self, tmp_path):
        tag_path = tmp_path / "tags.txt"
        tag_path.write_text("cat\n")
        with pytest.raises(ValueError, match="tags.txt:1"):
            TagLexicon.load(tag_path)
