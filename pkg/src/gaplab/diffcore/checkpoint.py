"""Bit-exact parameter checkpoints.

Layout: magic, format version, a length-prefixed JSON header describing every
array (name, shape, offset) plus step_count and free-form metadata, then the
raw little-endian float64 payload. Round-tripping preserves bytes exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"GLCK"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path, arrays: dict, step_count: int, metadata: dict | None = None) -> None:
    entries = []
    payload = bytearray()
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "offset": len(payload),
            "nbytes": arr.nbytes,
        })
        payload += arr.tobytes()
    header = json.dumps({
        "format_version": FORMAT_VERSION,
        "step_count": int(step_count),
        "metadata": metadata or {},
        "params": entries,
    }, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        f.write(payload)


def load_checkpoint(path):
    """Returns (arrays, step_count, metadata)."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    base = 16 + hlen
    arrays = {}
    for ent in header["params"]:
        start = base + ent["offset"]
        buf = raw[start:start + ent["nbytes"]]
        arrays[ent["name"]] = np.frombuffer(buf, dtype="<f8").reshape(ent["shape"]).copy()
    return arrays, header["step_count"], header["metadata"]
