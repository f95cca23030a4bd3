"""Experiment configuration and runners behind the command-line interface.

A run is fully determined by (input files, configuration, base seed): every
random draw comes from a stream named after the mechanism, query id, and
replicate index, so cells of a sweep can be computed in any order, and a
rerun reproduces each output file byte for byte. Output files are written to
a temporary sibling and atomically renamed into place.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from . import baselines, oracles, privacy, retrieval, wbb
from .embeddings import EmbeddingStore, SimilarityMeasure, load_embeddings
from .preprocess import TagLexicon, TaggedQuery, prepare_query
from .retrieval import IndexedCorpus, RelevanceJudgments, RunList
from .streams import derive_rng, stream_name

MECHANISMS = ("wbb", "cmp", "mahalanobis", "none")


class ConfigError(ValueError):
    """Configuration is incomplete or inconsistent for the requested command."""


@dataclass
class ExperimentConfig:
    """Everything a command needs; file values are overridden by CLI flags."""

    # data
    embeddings: Path | None = None
    lexicon: Path | None = None
    stopwords: Path | None = None
    corpus: Path | None = None
    queries: Path | None = None
    qrels: Path | None = None
    obfuscated: Path | None = None
    # mechanism
    mechanism: str = "wbb"
    mechanisms: tuple[str, ...] | None = None
    epsilon: float = 10.0
    k: int = 2
    n: int = 20
    measure: str = "angle"
    lam: float = 0.5
    # experiment
    batch: int = 20
    depth: int = 100
    scorers: tuple[str, ...] = ("bm25", "tfidf", "embedding")
    seed: int = 0
    out: Path = Path("out")
    epsilon_grid: tuple[float, ...] = (1.0, 5.0, 10.0, 50.0)
    k_grid: tuple[int, ...] = (2, 4)
    n_grid: tuple[int, ...] = (15, 20)
    measures: tuple[str, ...] = ("angle",)
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    oracle: bool = False

    def mechanism_list(self) -> tuple[str, ...]:
        names = self.mechanisms if self.mechanisms else (self.mechanism,)
        for name in names:
            if name not in MECHANISMS:
                raise ConfigError(f"unknown mechanism {name!r} (expected one of {MECHANISMS})")
        return names

    def require(self, *fields_needed: str) -> None:
        for name in fields_needed:
            value = getattr(self, name)
            if value is None:
                raise ConfigError(f"missing required input: {name}")
            if isinstance(value, Path) and not value.exists():
                raise ConfigError(f"{name} path does not exist: {value}")
        if self.batch < 1:
            raise ConfigError("batch count must be >= 1")
        if self.depth < 1:
            raise ConfigError("retrieval depth must be >= 1")
        for grid_name in ("epsilon_grid", "k_grid", "n_grid", "measures"):
            if not getattr(self, grid_name):
                raise ConfigError(f"{grid_name} must be non-empty")


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _tsv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(str(cell) for cell in row))
    return "\n".join(lines) + "\n"


@dataclass
class Obfuscator:
    """A named mechanism bound to its parameters and embedding store."""

    name: str
    tag: str
    epsilon: float
    _batch: Callable[[TaggedQuery, str, int, int], list[wbb.ObfuscationResult]]

    def batch(self, tagged: TaggedQuery, query_id: str, count: int, base_seed: int):
        return self._batch(tagged, query_id, count, base_seed)


def make_obfuscator(
    name: str,
    cfg: ExperimentConfig,
    store: EmbeddingStore,
    epsilon: float | None = None,
    k: int | None = None,
    n: int | None = None,
    measure: str | None = None,
    box_cache: wbb.BoxCache | None = None,
) -> Obfuscator:
    eps = cfg.epsilon if epsilon is None else epsilon
    if name == "wbb":
        mech_cfg = wbb.MechanismConfig(
            k=cfg.k if k is None else k,
            n=cfg.n if n is None else n,
            epsilon=eps,
            measure=SimilarityMeasure.parse(cfg.measure if measure is None else measure),
        )
        tag = mech_cfg.tag()

        def run_batch(tagged, query_id, count, base_seed):
            return wbb.obfuscate_batch(
                tagged, mech_cfg, store, count, base_seed,
                query_key=f"{tag}/{query_id}", box_cache=box_cache,
            )

        return Obfuscator(name=name, tag=tag, epsilon=eps, _batch=run_batch)

    if name in ("cmp", "mahalanobis"):
        noise_cfg = baselines.NoiseMechanismConfig(
            epsilon=eps,
            variant=name,
            lam=cfg.lam if name == "mahalanobis" else None,
        )
        shaping = baselines.shaping_matrix(store, cfg.lam) if name == "mahalanobis" else None
        tag = noise_cfg.tag()

        def run_batch(tagged, query_id, count, base_seed):
            results = []
            for i in range(count):
                key = f"{tag}/{query_id}"
                rng = derive_rng(base_seed, key, i)
                results.append(
                    baselines.baseline_obfuscate_query(
                        tagged, noise_cfg, store, rng,
                        stream=stream_name(base_seed, key, i), shaping=shaping,
                    )
                )
            return results

        return Obfuscator(name=name, tag=tag, epsilon=eps, _batch=run_batch)

    if name == "none":

        def run_batch(tagged, query_id, count, base_seed):
            result = wbb.ObfuscationResult(
                original=tagged,
                obfuscated_tokens=tagged.surfaces,
                provenance=(wbb.KEPT_NONTARGET,) * len(tagged.tokens),
                stream=stream_name(base_seed, f"none/{query_id}"),
            )
            return [result] * count

        return Obfuscator(name=name, tag="none", epsilon=0.0, _batch=run_batch)

    raise ConfigError(f"unknown mechanism {name!r}")


@dataclass
class Inputs:
    store: EmbeddingStore
    lexicon: TagLexicon
    queries: list[tuple[str, str]]
    index: IndexedCorpus | None = None
    qrels: RelevanceJudgments | None = None
    doc_tokens: dict[str, list[str]] = field(default_factory=dict)


def load_inputs(cfg: ExperimentConfig, need_corpus: bool = False) -> Inputs:
    cfg.require("embeddings", "lexicon", "queries")
    store = load_embeddings(cfg.embeddings)
    lexicon = TagLexicon.load(cfg.lexicon, stopwords_path=cfg.stopwords)
    queries = retrieval.read_queries(cfg.queries)
    inputs = Inputs(store=store, lexicon=lexicon, queries=queries)
    if need_corpus:
        cfg.require("corpus", "qrels")
        docs = retrieval.read_corpus(cfg.corpus)
        inputs.index = retrieval.build_index(docs, store=store)
        inputs.doc_tokens = dict(inputs.index.doc_tokens)
        inputs.qrels = RelevanceJudgments.load(cfg.qrels)
    return inputs


# ---------------------------------------------------------------------------
# obfuscate

OBFUSCATED_HEADER = ("qid", "replicate", "mechanism", "epsilon", "text", "provenance", "stream")


def run_obfuscate(cfg: ExperimentConfig) -> Path:
    inputs = load_inputs(cfg)
    obfuscator = make_obfuscator(cfg.mechanism, cfg, inputs.store, box_cache={})
    rows = []
    for qid, text in inputs.queries:
        tagged = prepare_query(text, inputs.store, inputs.lexicon)
        for i, result in enumerate(obfuscator.batch(tagged, qid, cfg.batch, cfg.seed)):
            rows.append(
                (qid, i, obfuscator.name, f"{obfuscator.epsilon:g}", result.text,
                 result.provenance_summary(), result.stream)
            )
    out = Path(cfg.out)
    target = out / "obfuscated.tsv"
    write_text_atomic(target, _tsv(rows, OBFUSCATED_HEADER))
    return target


# ---------------------------------------------------------------------------
# privacy-eval

PRIVACY_SUMMARY_HEADER = (
    "mechanism", "epsilon", "records",
    "mean_jaccard", "std_jaccard", "mean_jaccard_targets", "mean_semantic", "std_semantic",
)


def _privacy_cells(cfg: ExperimentConfig) -> list[tuple[str, float | None]]:
    cells: list[tuple[str, float | None]] = []
    for name in cfg.mechanism_list():
        if name == "none":
            cells.append((name, None))
        else:
            cells.extend((name, eps) for eps in cfg.epsilon_grid)
    return cells


def collect_privacy_records(
    cfg: ExperimentConfig,
    inputs: Inputs,
    obfuscator: Obfuscator,
) -> list[privacy.PrivacyRecord]:
    records = []
    for qid, text in inputs.queries:
        tagged = prepare_query(text, inputs.store, inputs.lexicon)
        for i, result in enumerate(obfuscator.batch(tagged, qid, cfg.batch, cfg.seed)):
            records.append(
                privacy.evaluate_result(
                    qid, obfuscator.name, obfuscator.epsilon, i, tagged, result, inputs.store
                )
            )
    return records


def run_privacy_eval(cfg: ExperimentConfig) -> Path:
    inputs = load_inputs(cfg)
    box_cache: wbb.BoxCache = {}
    all_records: list[privacy.PrivacyRecord] = []
    for name, eps in _privacy_cells(cfg):
        obfuscator = make_obfuscator(name, cfg, inputs.store, epsilon=eps, box_cache=box_cache)
        all_records.extend(collect_privacy_records(cfg, inputs, obfuscator))
    summaries = privacy.summarize_records(all_records)
    rows = [
        (s.mechanism, f"{s.epsilon:g}", s.count,
         f"{s.mean_jaccard:.6f}", f"{s.std_jaccard:.6f}", f"{s.mean_jaccard_targets:.6f}",
         f"{s.mean_semantic:.6f}", f"{s.std_semantic:.6f}")
        for s in summaries
    ]
    out = Path(cfg.out)
    summary_path = out / "privacy_summary.tsv"
    write_text_atomic(summary_path, _tsv(rows, PRIVACY_SUMMARY_HEADER))
    record_lines = [
        json.dumps(
            {
                "qid": r.query_id, "mechanism": r.mechanism, "epsilon": r.epsilon,
                "replicate": r.replicate, "jaccard": r.jaccard,
                "jaccard_targets": r.jaccard_targets, "semantic": r.semantic,
            },
            sort_keys=True,
        )
        for r in all_records
    ]
    write_text_atomic(out / "privacy_records.jsonl", "\n".join(record_lines) + "\n")
    return summary_path


# ---------------------------------------------------------------------------
# retrieval-eval

RETRIEVAL_SUMMARY_HEADER = (
    "mechanism", "epsilon", "scorer", "queries", "skipped",
    "mean_pooled_recall", "mean_ndcg10",
)


def _production_backend(cfg: ExperimentConfig, inputs: Inputs):
    index, store = inputs.index, inputs.store

    def search(scorer: str, tokens: Sequence[str], qid: str, tag: str) -> RunList:
        if scorer == "bm25":
            return retrieval.bm25_search(index, tokens, cfg.bm25_k1, cfg.bm25_b, cfg.depth, qid, tag)
        if scorer == "tfidf":
            return retrieval.tfidf_search(index, tokens, cfg.depth, qid, tag)
        if scorer == "embedding":
            try:
                return retrieval.embedding_search(index, tokens, store, cfg.depth, qid, tag)
            except ValueError:
                return RunList(query_id=qid, entries=(), tag=tag)
        raise ConfigError(f"unknown scorer {scorer!r}")

    def rerank_pool(pool: set[str], tokens: Sequence[str], qid: str, tag: str) -> RunList:
        return retrieval.rerank(pool, tokens, store, index, qid, tag)

    def metric_recall(pool: set[str], qid: str) -> float:
        return retrieval.pooled_recall(pool, inputs.qrels, qid)

    def metric_ndcg(run: RunList) -> float:
        return retrieval.ndcg_at(run, inputs.qrels, 10)

    return search, rerank_pool, metric_recall, metric_ndcg


def _oracle_backend(cfg: ExperimentConfig, inputs: Inputs):
    docs, store, qrels = inputs.doc_tokens, inputs.store, inputs.qrels

    def search(scorer: str, tokens: Sequence[str], qid: str, tag: str) -> RunList:
        if scorer == "bm25":
            scores = oracles.naive_bm25_scores(docs, tokens, cfg.bm25_k1, cfg.bm25_b)
        elif scorer == "tfidf":
            scores = oracles.naive_tfidf_scores(docs, tokens)
        elif scorer == "embedding":
            try:
                scores = oracles.naive_embedding_scores(docs, tokens, store)
            except ValueError:
                scores = {}
        else:
            raise ConfigError(f"unknown scorer {scorer!r}")
        return RunList(qid, tuple(oracles.rank_scores(scores, cfg.depth)), tag)

    def rerank_pool(pool: set[str], tokens: Sequence[str], qid: str, tag: str) -> RunList:
        pool_docs = {d: docs[d] for d in pool}
        scores = oracles.naive_embedding_scores(pool_docs, tokens, store)
        return RunList(qid, tuple(oracles.rank_scores(scores, len(pool))), tag)

    def metric_recall(pool: set[str], qid: str) -> float:
        return oracles.naive_recall(sorted(pool), sorted(qrels.relevant_docs(qid)))

    def metric_ndcg(run: RunList) -> float:
        return oracles.naive_ndcg_at(run.doc_ids(), qrels.graded(run.query_id), 10)

    return search, rerank_pool, metric_recall, metric_ndcg


def run_retrieval_cell(
    cfg: ExperimentConfig,
    inputs: Inputs,
    obfuscator: Obfuscator,
    out_dir: Path | None,
) -> list[tuple]:
    """One (mechanism, epsilon) cell: obfuscate, search, pool, rerank, score.

    Returns summary rows (one per scorer) and, when ``out_dir`` is given,
    writes replicate run files plus the reranked run per scorer.
    """
    backend = _oracle_backend(cfg, inputs) if cfg.oracle else _production_backend(cfg, inputs)
    search, rerank_pool, metric_recall, metric_ndcg = backend
    per_scorer: dict[str, dict[str, list]] = {
        s: {"recall": [], "ndcg": [], "runs": [[] for _ in range(cfg.batch)], "reranked": []}
        for s in cfg.scorers
    }
    skipped = 0
    for qid, text in inputs.queries:
        if not inputs.qrels.relevant_docs(qid):
            skipped += 1
            continue
        tagged = prepare_query(text, inputs.store, inputs.lexicon)
        results = obfuscator.batch(tagged, qid, cfg.batch, cfg.seed)
        for scorer in cfg.scorers:
            state = per_scorer[scorer]
            runs = []
            for i, result in enumerate(results):
                tag = f"{obfuscator.tag}-{scorer}-r{i:02d}"
                run = search(scorer, list(result.obfuscated_tokens), qid, tag)
                runs.append(run)
                state["runs"][i].append(run)
            pool = set()
            for run in runs:
                pool.update(run.doc_ids())
            reranked = rerank_pool(pool, list(tagged.surfaces), qid, f"{obfuscator.tag}-{scorer}-rerank")
            state["reranked"].append(reranked)
            state["recall"].append(metric_recall(pool, qid))
            state["ndcg"].append(metric_ndcg(reranked))

    rows = []
    for scorer in cfg.scorers:
        state = per_scorer[scorer]
        scored = len(state["recall"])
        mean_recall = sum(state["recall"]) / scored if scored else 0.0
        mean_ndcg = sum(state["ndcg"]) / scored if scored else 0.0
        rows.append(
            (obfuscator.name, f"{obfuscator.epsilon:g}", scorer, scored, skipped,
             f"{mean_recall:.6f}", f"{mean_ndcg:.6f}")
        )
        if out_dir is not None:
            run_dir = out_dir / "runs" / f"mech-{obfuscator.tag}" / scorer
            for i, replicate_runs in enumerate(state["runs"]):
                lines = []
                for run in replicate_runs:
                    lines.extend(retrieval.run_lines(run))
                write_text_atomic(run_dir / f"rep{i:02d}.run", "\n".join(lines) + ("\n" if lines else ""))
            lines = []
            for run in state["reranked"]:
                lines.extend(retrieval.run_lines(run))
            write_text_atomic(run_dir / "reranked.run", "\n".join(lines) + ("\n" if lines else ""))
    return rows


def run_retrieval_eval(cfg: ExperimentConfig) -> Path:
    inputs = load_inputs(cfg, need_corpus=True)
    box_cache: wbb.BoxCache = {}
    rows = []
    out = Path(cfg.out)
    for name, eps in _privacy_cells(cfg):
        obfuscator = make_obfuscator(name, cfg, inputs.store, epsilon=eps, box_cache=box_cache)
        rows.extend(run_retrieval_cell(cfg, inputs, obfuscator, out))
    summary_path = out / "retrieval_summary.tsv"
    write_text_atomic(summary_path, _tsv(rows, RETRIEVAL_SUMMARY_HEADER))
    return summary_path


# ---------------------------------------------------------------------------
# sweep

SWEEP_HEADER_BASE = (
    "k", "n", "measure", "epsilon", "status", "records",
    "mean_jaccard", "mean_jaccard_targets", "mean_semantic",
)


def cell_name(epsilon: float, k: int, n: int, measure: str, mechanism: str = "wbb") -> str:
    return f"mech-{mechanism}_eps-{epsilon:g}_k-{k}_n-{n}_meas-{measure}"


def run_sweep(cfg: ExperimentConfig) -> Path:
    inputs = load_inputs(cfg, need_corpus=True)
    box_cache: wbb.BoxCache = {}
    out = Path(cfg.out)
    header = SWEEP_HEADER_BASE + tuple(
        f"{metric}_{scorer}" for scorer in cfg.scorers for metric in ("recall", "ndcg10")
    )
    rows = []
    json_rows = []
    vocab_size = len(inputs.store)
    for k in cfg.k_grid:
        for n in cfg.n_grid:
            for measure in cfg.measures:
                for eps in cfg.epsilon_grid:
                    name = cell_name(eps, k, n, measure)
                    if k + n > vocab_size:
                        row = [k, n, measure, f"{eps:g}", "infeasible", 0] + [""] * (len(header) - 6)
                        rows.append(row)
                        json_rows.append({"k": k, "n": n, "measure": measure, "epsilon": eps,
                                          "status": "infeasible"})
                        continue
                    obfuscator = make_obfuscator(
                        "wbb", cfg, inputs.store, epsilon=eps, k=k, n=n, measure=measure,
                        box_cache=box_cache,
                    )
                    records = collect_privacy_records(cfg, inputs, obfuscator)
                    summary = privacy.summarize_records(records)[0]
                    cell_dir = out / name
                    retrieval_rows = run_retrieval_cell(cfg, inputs, obfuscator, cell_dir)
                    write_text_atomic(
                        cell_dir / "privacy_summary.tsv",
                        _tsv(
                            [(summary.mechanism, f"{summary.epsilon:g}", summary.count,
                              f"{summary.mean_jaccard:.6f}", f"{summary.std_jaccard:.6f}",
                              f"{summary.mean_jaccard_targets:.6f}", f"{summary.mean_semantic:.6f}",
                              f"{summary.std_semantic:.6f}")],
                            PRIVACY_SUMMARY_HEADER,
                        ),
                    )
                    write_text_atomic(
                        cell_dir / "retrieval_summary.tsv",
                        _tsv(retrieval_rows, RETRIEVAL_SUMMARY_HEADER),
                    )
                    metrics = {}
                    for r in retrieval_rows:
                        metrics[f"recall_{r[2]}"] = r[5]
                        metrics[f"ndcg10_{r[2]}"] = r[6]
                    row = [
                        k, n, measure, f"{eps:g}", "ok", summary.count,
                        f"{summary.mean_jaccard:.6f}", f"{summary.mean_jaccard_targets:.6f}",
                        f"{summary.mean_semantic:.6f}",
                    ] + [metrics.get(f"{metric}_{scorer}", "") for scorer in cfg.scorers
                         for metric in ("recall", "ndcg10")]
                    rows.append(row)
                    json_rows.append(
                        {
                            "k": k, "n": n, "measure": measure, "epsilon": eps, "status": "ok",
                            "records": summary.count,
                            "mean_jaccard": summary.mean_jaccard,
                            "mean_jaccard_targets": summary.mean_jaccard_targets,
                            "mean_semantic": summary.mean_semantic,
                            **{key: float(value) for key, value in metrics.items()},
                        }
                    )
    sweep_path = out / "sweep.tsv"
    write_text_atomic(sweep_path, _tsv(rows, header))
    write_text_atomic(
        out / "sweep.jsonl",
        "\n".join(json.dumps(r, sort_keys=True) for r in json_rows) + "\n",
    )
    return sweep_path
