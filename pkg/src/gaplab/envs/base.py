"""Shared environment plumbing.

Envs are value-like state machines: the env object holds immutable task
configuration, per-episode state lives in a small state object created by
`reset(rng)` and advanced by `step(state, action)`. `observe(state)` is pure;
querying the same state twice gives the same payload.
"""

from __future__ import annotations

import hashlib
import itertools
import struct
from dataclasses import dataclass

import numpy as np


class IllegalAction(RuntimeError):
    """An action outside the legal set for the current phase; a harness bug."""


class GenerationError(RuntimeError):
    """Maze generation could not produce a solvable layout within retry bounds."""


_episode_counter = itertools.count(1)


def next_episode_key() -> int:
    """Monotonic id stamped on episode states; experts key their caches on it."""
    return next(_episode_counter)


@dataclass(frozen=True)
class Observation:
    """Interface-level wrapper: payload plus enough typing to serialize it.

    kind: "cat" (small int), "index" (int into a fixed vocabulary),
    "grid" (small integer tensor), or "tuple" (hashable history key).
    """
    kind: str
    data: object
    last_action: int | None = None


def obs_hash(payload) -> str:
    """Stable content hash of an observation payload, for golden traces."""
    h = hashlib.sha256()
    if isinstance(payload, (int, np.integer)):
        h.update(b"int")
        h.update(struct.pack("<q", int(payload)))
    elif isinstance(payload, np.ndarray):
        h.update(b"arr")
        h.update(str(payload.dtype).encode())
        h.update(struct.pack("<i", payload.ndim))
        h.update(struct.pack(f"<{payload.ndim}i", *payload.shape))
        h.update(np.ascontiguousarray(payload).tobytes())
    elif isinstance(payload, tuple):
        h.update(b"tup")
        h.update(repr(payload).encode("utf-8"))
    else:
        raise TypeError(f"unhashable observation payload type {type(payload).__name__}")
    return h.hexdigest()
