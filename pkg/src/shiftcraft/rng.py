"""Deterministic, named random streams.

Every random draw in the package comes from a stream derived from a master
seed plus a tuple of keys (item index, stage tag, step, ...). Streams do not
depend on call order, so parallel workers reproduce serial results exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"stream keys must be non-negative, got {key}")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def derive_seed(seed: int, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key_to_int(k) for k in keys))


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Return a PCG64 generator for ``(seed, *keys)``.

    The same arguments always produce the same stream; any change in a key
    gives a statistically independent one.
    """
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, or None (seed 0)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return derive_rng(0 if rng is None else int(rng))
