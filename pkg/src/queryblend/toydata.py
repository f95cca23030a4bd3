"""Deterministic toy fixtures: embeddings, tag lexicon, corpus, queries, qrels.

Everything is generated from fixed seeds so tests and command-line demos can
rebuild byte-identical inputs. The vocabulary mixes a hand-picked set of
topical content words (used by the corpus and queries) with synthetic filler
words that pad the embedding table to the requested size.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .embeddings import EmbeddingStore

TOPIC_WORDS: dict[str, list[tuple[str, str]]] = {
    "medical": [
        ("treatment", "noun"), ("skin", "noun"), ("cancer", "noun"), ("therapy", "noun"),
        ("disease", "noun"), ("patient", "noun"), ("clinical", "adjective"), ("symptom", "noun"),
        ("diagnosis", "noun"), ("vaccine", "noun"), ("infection", "noun"), ("chronic", "adjective"),
    ],
    "space": [
        ("rocket", "noun"), ("orbit", "noun"), ("planet", "noun"), ("telescope", "noun"),
        ("lunar", "adjective"), ("satellite", "noun"), ("astronaut", "noun"), ("galaxy", "noun"),
        ("solar", "adjective"), ("cosmic", "adjective"), ("station", "noun"), ("launch", "noun"),
    ],
    "cooking": [
        ("recipe", "noun"), ("flour", "noun"), ("butter", "noun"), ("oven", "noun"),
        ("pastry", "noun"), ("sauce", "noun"), ("garlic", "noun"), ("roast", "noun"),
        ("kitchen", "noun"), ("savory", "adjective"), ("bread", "noun"), ("spice", "noun"),
    ],
    "music": [
        ("guitar", "noun"), ("melody", "noun"), ("concert", "noun"), ("rhythm", "noun"),
        ("acoustic", "adjective"), ("orchestra", "noun"), ("piano", "noun"), ("chord", "noun"),
        ("tempo", "noun"), ("vocal", "adjective"), ("album", "noun"), ("studio", "noun"),
    ],
    "sports": [
        ("marathon", "noun"), ("stadium", "noun"), ("soccer", "noun"), ("athlete", "noun"),
        ("training", "noun"), ("coach", "noun"), ("tournament", "noun"), ("fitness", "noun"),
        ("endurance", "noun"), ("league", "noun"), ("referee", "noun"), ("sprint", "noun"),
    ],
}

STOPWORDS = [
    "the", "a", "an", "for", "of", "in", "on", "to", "and", "or", "with",
    "is", "are", "be", "what", "when", "how", "does", "do", "can", "at",
    "by", "from", "this", "that", "best",
]

# Deliberately absent from every embedding file: exercises the OOV path.
OOV_WORDS = ["watching", "easy"]


def content_words() -> list[tuple[str, str]]:
    words = []
    for topic in TOPIC_WORDS.values():
        words.extend(topic)
    return words


def vocabulary(n_words: int) -> list[str]:
    """Content words, stop-words, then synthetic filler up to ``n_words``."""
    base = [w for w, _ in content_words()] + STOPWORDS
    if n_words < len(base):
        raise ValueError(f"need at least {len(base)} words to cover the fixture texts")
    fillers = [f"w{i:04d}" for i in range(n_words - len(base))]
    return base + fillers


def build_store(n_words: int = 5000, dim: int = 50, seed: int = 13) -> EmbeddingStore:
    """Gaussian vectors with log-normal per-word scales.

    The scale spread keeps Euclidean distance and cosine from ordering the
    vocabulary identically, so the three similarity measures stay distinct.
    """
    words = vocabulary(n_words)
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((len(words), dim))
    scales = np.exp(rng.normal(0.0, 0.4, size=len(words)))
    vectors *= scales[:, None]
    return EmbeddingStore(words, vectors)


def write_embeddings(path, n_words: int = 5000, dim: int = 50, seed: int = 13) -> Path:
    store = build_store(n_words=n_words, dim=dim, seed=seed)
    lines = []
    for word in store.words:
        vec = store.vector(word)
        lines.append(word + " " + " ".join(f"{x:.6f}" for x in vec))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_lexicon(path) -> Path:
    lines = [f"{word} {tag}" for word, tag in content_words()]
    lines += [f"{word} other" for word in STOPWORDS]
    lines += ["watching verb", "easy adjective"]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_stopwords(path) -> Path:
    path = Path(path)
    path.write_text("\n".join(STOPWORDS) + "\n", encoding="utf-8")
    return path


def toy_corpus() -> list[tuple[str, str]]:
    """Twenty short documents, four per topic."""
    docs = []
    for topic, words in TOPIC_WORDS.items():
        terms = [w for w, _ in words]
        docs.append((f"{topic}-1", f"the {terms[0]} of {terms[1]} {terms[2]} and {terms[3]}"))
        docs.append((f"{topic}-2", f"a {terms[4]} {terms[5]} with {terms[6]} {terms[7]} in the {terms[0]}"))
        docs.append((f"{topic}-3", f"{terms[8]} and {terms[9]} for the {terms[10]} {terms[11]}"))
        docs.append((f"{topic}-4", f"how {terms[2]} {terms[5]} can be {terms[9]} with {terms[11]} and {terms[3]}"))
    return docs


def toy_queries() -> list[tuple[str, str]]:
    return [
        ("q1", "treatment for skin cancer"),
        ("q2", "best telescope for planet watching"),
        ("q3", "easy bread recipe with garlic"),
        ("q4", "acoustic guitar concert melody"),
        ("q5", "marathon training for endurance athlete"),
    ]


def toy_qrels() -> dict[tuple[str, str], int]:
    topics = ["medical", "space", "cooking", "music", "sports"]
    judgments: dict[tuple[str, str], int] = {}
    for qid, topic in zip([q for q, _ in toy_queries()], topics):
        judgments[(qid, f"{topic}-1")] = 2
        judgments[(qid, f"{topic}-2")] = 2
        judgments[(qid, f"{topic}-3")] = 1
        judgments[(qid, f"{topic}-4")] = 1
        # a couple of judged non-relevant entries, as real qrels carry
        other = topics[(topics.index(topic) + 1) % len(topics)]
        judgments[(qid, f"{other}-1")] = 0
    return judgments


def write_corpus(path) -> Path:
    import json

    lines = [json.dumps({"doc_id": d, "text": t}, sort_keys=True) for d, t in toy_corpus()]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_queries(path) -> Path:
    lines = [f"{qid}\t{text}" for qid, text in toy_queries()]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_qrels(path) -> Path:
    lines = [f"{qid} 0 {doc} {rel}" for (qid, doc), rel in toy_qrels().items()]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def single_target_queries(count: int = 100, seed: int = 29, n_words: int = 5000) -> list[tuple[str, str]]:
    """Queries shaped ``the <word>`` with exactly one obfuscation target each."""
    words = vocabulary(n_words)
    eligible = [w for w in words if w not in STOPWORDS]
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(eligible), size=count, replace=False)
    return [(f"s{i:03d}", f"the {eligible[j]}") for i, j in enumerate(picks)]


def multiword_queries(count: int = 100, words_per_query: int = 6, seed: int = 31, n_words: int = 5000) -> list[tuple[str, str]]:
    """All-in-vocabulary multi-word queries for the noise-baseline trend checks."""
    words = vocabulary(n_words)
    eligible = [w for w in words if w not in STOPWORDS]
    rng = np.random.default_rng(seed)
    queries = []
    for i in range(count):
        picks = rng.choice(len(eligible), size=words_per_query, replace=False)
        queries.append((f"m{i:03d}", " ".join(eligible[j] for j in picks)))
    return queries


def write_query_file(path, queries: list[tuple[str, str]]) -> Path:
    lines = [f"{qid}\t{text}" for qid, text in queries]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_desk_fixture(directory, n_words: int = 5000, dim: int = 50, seed: int = 13) -> dict[str, Path]:
    """Write the full fixture set into a directory and return the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "embeddings": write_embeddings(directory / "embeddings.txt", n_words=n_words, dim=dim, seed=seed),
        "lexicon": write_lexicon(directory / "lexicon.txt"),
        "stopwords": write_stopwords(directory / "stopwords.txt"),
        "corpus": write_corpus(directory / "corpus.jsonl"),
        "queries": write_queries(directory / "queries.tsv"),
        "qrels": write_qrels(directory / "qrels.txt"),
    }
    return paths
