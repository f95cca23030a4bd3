"""Command-line entry point.

Subcommands: ``obfuscate``, ``privacy-eval``, ``retrieval-eval``, ``sweep``.
Settings come from an INI config file (sections [data], [mechanism],
[experiment]) overridden by flags; every command takes --config, --seed,
and --out. Exit status is nonzero iff an error occurred.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from .experiment import (
    ConfigError,
    ExperimentConfig,
    run_obfuscate,
    run_privacy_eval,
    run_retrieval_eval,
    run_sweep,
)

_PATH_KEYS = ("embeddings", "lexicon", "stopwords", "corpus", "queries", "qrels", "obfuscated")


def _split_csv(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _apply_config_file(cfg: ExperimentConfig, path: Path) -> None:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file: {path}")
    data = parser["data"] if parser.has_section("data") else {}
    for key in _PATH_KEYS:
        if key in data:
            setattr(cfg, key, Path(data[key]))
    mech = parser["mechanism"] if parser.has_section("mechanism") else {}
    if "name" in mech:
        cfg.mechanism = mech["name"]
    if "mechanisms" in mech:
        cfg.mechanisms = tuple(_split_csv(mech["mechanisms"]))
    if "epsilon" in mech:
        cfg.epsilon = float(mech["epsilon"])
    if "k" in mech:
        cfg.k = int(mech["k"])
    if "n" in mech:
        cfg.n = int(mech["n"])
    if "measure" in mech:
        cfg.measure = mech["measure"]
    if "lambda" in mech:
        cfg.lam = float(mech["lambda"])
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    if "batch" in exp:
        cfg.batch = int(exp["batch"])
    if "depth" in exp:
        cfg.depth = int(exp["depth"])
    if "scorers" in exp:
        cfg.scorers = tuple(_split_csv(exp["scorers"]))
    if "seed" in exp:
        cfg.seed = int(exp["seed"])
    if "out" in exp:
        cfg.out = Path(exp["out"])
    if "epsilon_grid" in exp:
        cfg.epsilon_grid = tuple(float(x) for x in _split_csv(exp["epsilon_grid"]))
    if "k_grid" in exp:
        cfg.k_grid = tuple(int(x) for x in _split_csv(exp["k_grid"]))
    if "n_grid" in exp:
        cfg.n_grid = tuple(int(x) for x in _split_csv(exp["n_grid"]))
    if "measures" in exp:
        cfg.measures = tuple(_split_csv(exp["measures"]))
    if "bm25_k1" in exp:
        cfg.bm25_k1 = float(exp["bm25_k1"])
    if "bm25_b" in exp:
        cfg.bm25_b = float(exp["bm25_b"])


def _apply_flags(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    for key in _PATH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, Path(value))
    if args.mechanism is not None:
        cfg.mechanism = args.mechanism
    if args.mechanisms is not None:
        cfg.mechanisms = tuple(_split_csv(args.mechanisms))
    if args.epsilon is not None:
        cfg.epsilon = args.epsilon
    if args.k is not None:
        cfg.k = args.k
    if args.n is not None:
        cfg.n = args.n
    if args.measure is not None:
        cfg.measure = args.measure
    if args.lam is not None:
        cfg.lam = args.lam
    if args.batch is not None:
        cfg.batch = args.batch
    if args.depth is not None:
        cfg.depth = args.depth
    if args.scorers is not None:
        cfg.scorers = tuple(_split_csv(args.scorers))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = Path(args.out)
    if args.epsilon_grid is not None:
        cfg.epsilon_grid = tuple(float(x) for x in _split_csv(args.epsilon_grid))
    if args.k_grid is not None:
        cfg.k_grid = tuple(int(x) for x in _split_csv(args.k_grid))
    if args.n_grid is not None:
        cfg.n_grid = tuple(int(x) for x in _split_csv(args.n_grid))
    if args.measures is not None:
        cfg.measures = tuple(_split_csv(args.measures))
    if args.bm25_k1 is not None:
        cfg.bm25_k1 = args.bm25_k1
    if args.bm25_b is not None:
        cfg.bm25_b = args.bm25_b
    if getattr(args, "oracle", False):
        cfg.oracle = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file")
    common.add_argument("--seed", type=int, help="base seed for all random streams")
    common.add_argument("--out", type=Path, help="output directory")
    for key in _PATH_KEYS:
        common.add_argument(f"--{key}", type=Path)
    common.add_argument("--mechanism", choices=("wbb", "cmp", "mahalanobis", "none"))
    common.add_argument("--mechanisms", help="comma-separated mechanisms for eval commands")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--measure", choices=("angle", "distance", "product"))
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--batch", type=int, help="obfuscated replicates per query")
    common.add_argument("--depth", type=int, help="retrieval depth per run")
    common.add_argument("--scorers", help="comma-separated subset of bm25,tfidf,embedding")
    common.add_argument("--epsilon-grid", dest="epsilon_grid")
    common.add_argument("--k-grid", dest="k_grid")
    common.add_argument("--n-grid", dest="n_grid")
    common.add_argument("--measures")
    common.add_argument("--bm25-k1", dest="bm25_k1", type=float)
    common.add_argument("--bm25-b", dest="bm25_b", type=float)

    parser = argparse.ArgumentParser(prog="queryblend", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("obfuscate", parents=[common], help="write obfuscated query replicates")
    sub.add_parser("privacy-eval", parents=[common], help="score lexical/semantic privacy")
    retrieval_parser = sub.add_parser(
        "retrieval-eval", parents=[common], help="run the obfuscate-search-pool-rerank pipeline"
    )
    retrieval_parser.add_argument(
        "--oracle", action="store_true",
        help="score with the brute-force reference implementations (golden-file generation)",
    )
    sub.add_parser("sweep", parents=[common], help="grid over (k, n, measure, epsilon)")
    return parser


_COMMANDS = {
    "obfuscate": run_obfuscate,
    "privacy-eval": run_privacy_eval,
    "retrieval-eval": run_retrieval_eval,
    "sweep": run_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = ExperimentConfig()
    try:
        if args.config is not None:
            _apply_config_file(cfg, args.config)
        _apply_flags(cfg, args)
        result = _COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"queryblend: error: {exc}", file=sys.stderr)
        return 1
    print(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
