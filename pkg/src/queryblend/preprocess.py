"""Query normalization and selection of obfuscation targets.

Obfuscation applies only to tokens that a coarse tag lexicon marks as nouns
or adjectives (configurable) and that are present in the embedding
vocabulary. Everything else passes through unchanged, with out-of-vocabulary
tokens flagged so the leakage is visible rather than silent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .embeddings import EmbeddingStore

# Runs of letters/digits; underscores and all punctuation act as separators.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_TARGET_TAGS = frozenset({"noun", "adjective"})


def normalize_and_tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, dropping empty pieces."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class QueryToken:
    surface: str
    target: bool
    in_vocab: bool


@dataclass(frozen=True)
class TaggedQuery:
    """A normalized query with per-token obfuscation decisions."""

    original_text: str
    tokens: tuple[QueryToken, ...]

    @property
    def normalized(self) -> str:
        return " ".join(t.surface for t in self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @property
    def target_surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens if t.target)


@dataclass(frozen=True)
class TagLexicon:
    """File-backed word -> coarse tag map with a closed stop-word list.

    Unknown words default to ``noun``, the privacy-conservative choice: a
    word we cannot classify is treated as worth obfuscating. Stop-words are
    never targets regardless of their tag.
    """

    tags: Mapping[str, str]
    stopwords: frozenset[str] = frozenset()
    target_tags: frozenset[str] = DEFAULT_TARGET_TAGS
    default_tag: str = "noun"

    def __post_init__(self):
        object.__setattr__(self, "tags", MappingProxyType(dict(self.tags)))

    def tag(self, word: str) -> str:
        return self.tags.get(word, self.default_tag)

    def is_target(self, word: str) -> bool:
        return word not in self.stopwords and self.tag(word) in self.target_tags

    @classmethod
    def load(
        cls,
        tag_path,
        stopwords_path=None,
        target_tags=DEFAULT_TARGET_TAGS,
    ) -> "TagLexicon":
        """Read ``<word> <tag>`` lines plus an optional one-word-per-line stop list."""
        tags: dict[str, str] = {}
        with Path(tag_path).open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"{Path(tag_path).name}:{lineno}: expected '<word> <tag>'")
                tags[parts[0].lower()] = parts[1].lower()
        stopwords: frozenset[str] = frozenset()
        if stopwords_path is not None:
            with Path(stopwords_path).open("r", encoding="utf-8") as handle:
                stopwords = frozenset(w.strip().lower() for w in handle if w.strip())
        return cls(tags=tags, stopwords=stopwords, target_tags=frozenset(target_tags))


def tag_targets(
    tokens: list[str],
    store: EmbeddingStore,
    lexicon: TagLexicon,
    original_text: str | None = None,
) -> TaggedQuery:
    """Mark each normalized token as an obfuscation target or a pass-through.

    A token is a target only when the lexicon classifies it into a target
    tag and the embedding vocabulary covers it; out-of-vocabulary tokens are
    never targets.
    """
    tagged = []
    for token in tokens:
        in_vocab = token in store
        tagged.append(QueryToken(surface=token, target=in_vocab and lexicon.is_target(token), in_vocab=in_vocab))
    text = original_text if original_text is not None else " ".join(tokens)
    return TaggedQuery(original_text=text, tokens=tuple(tagged))


def prepare_query(text: str, store: EmbeddingStore, lexicon: TagLexicon) -> TaggedQuery:
    """Normalize raw query text and tag its obfuscation targets."""
    return tag_targets(normalize_and_tokenize(text), store, lexicon, original_text=text)
