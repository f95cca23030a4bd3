#!/usr/bin/env python3
"""Write a self-contained toy fixture set (embeddings, lexicon, corpus,
queries, qrels) for driving the CLI. Deterministic for a given seed."""

import argparse
from pathlib import Path

from queryblend import toydata


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--words", type=int, default=5000, help="embedding vocabulary size")
    parser.add_argument("--dim", type=int, default=50, help="embedding dimension")
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()
    paths = toydata.write_desk_fixture(args.out, n_words=args.words, dim=args.dim, seed=args.seed)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
