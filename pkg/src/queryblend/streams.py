"""Named, seedable random streams.

Every stochastic component in the toolkit draws from a generator derived
from a base seed plus a sequence of string or integer keys (query id,
replicate index, mechanism tag, ...). Derivation is pure, so two runs with
the same seed and keys see identical randomness regardless of execution
order, and distinct key tuples give statistically independent streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_material(parts: tuple) -> list[int]:
    material = []
    for part in parts:
        if isinstance(part, (int, np.integer)):
            material.append(int(part) & _MASK64)
        else:
            digest = hashlib.blake2b(str(part).encode("utf-8"), digest_size=8).digest()
            material.append(int.from_bytes(digest, "little"))
    return material


def derive_rng(base_seed: int, *parts) -> np.random.Generator:
    """Generator for the stream named by (base_seed, *parts)."""
    entropy = [int(base_seed) & _MASK64, *_key_material(parts)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def stream_name(base_seed: int, *parts) -> str:
    """Printable identifier of a derived stream, recorded for provenance."""
    return "/".join([f"seed={int(base_seed)}", *(str(p) for p in parts)])
