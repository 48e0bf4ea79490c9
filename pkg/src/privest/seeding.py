"""Deterministic random-stream derivation.

Every random stream in the package is derived from a root seed plus a tuple
of keys (trial index, cell index, string labels).  Keys are hashed together by
``numpy.random.SeedSequence``; string keys are first mapped to integers with
CRC-32 so that derivation is stable across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    key = int(key)
    if key < 0:
        raise ValueError(f"seed keys must be non-negative, got {key}")
    return key


def derive_seed_sequence(root_seed: int, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence([_key_to_int(root_seed)] + [_key_to_int(k) for k in keys])


def derive_rng(root_seed: int, *keys) -> np.random.Generator:
    """Return an independent generator for the stream ``(root_seed, *keys)``."""
    return np.random.default_rng(derive_seed_sequence(root_seed, *keys))


def as_rng(rng) -> np.random.Generator:
    """Accept an int seed, a Generator, or any object with ``random()``."""
    if rng is None:
        raise ValueError("an explicit seed or generator is required")
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    return rng
