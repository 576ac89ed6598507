"""Deterministic RNG derivation from structured keys.

Every random draw in the library flows from a `numpy.random.Generator`
obtained here, so a run is a pure function of its seed tuple.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _as_entropy(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"seed parts must be int or str, got {type(part).__name__}")


def seed_sequence(*parts) -> np.random.SeedSequence:
    """Build a SeedSequence from a mixed tuple of ints and strings.

    Strings are hashed with sha256 so the mapping is stable across
    processes and platforms.
    """
    return np.random.SeedSequence([_as_entropy(p) for p in parts])


def rng_for(*parts) -> np.random.Generator:
    """Generator keyed by a structured seed tuple, e.g. rng_for(seed, "lane", 3)."""
    return np.random.default_rng(seed_sequence(*parts))
