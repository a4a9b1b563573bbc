"""Versioned binary parameter checkpoints.

Layout: magic ``LEFTNET1`` | u64-LE config-JSON length | config JSON |
flat little-endian float64 parameter arrays in declaration order |
trailing u64-LE total float count as a cheap integrity checksum.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .model import ModelConfig, ModelParams, init_params

MAGIC = b"LEFTNET1"


def save_checkpoint(mp: ModelParams, path) -> None:
    header = json.dumps(
        {"config": asdict(mp.config), "seed": mp.seed}).encode()
    blob = [MAGIC, struct.pack("<Q", len(header)), header]
    total = 0
    for tensor in mp.params.values():
        arr = np.ascontiguousarray(tensor.data, dtype="<f8")
        blob.append(arr.tobytes())
        total += arr.size
    blob.append(struct.pack("<Q", total))
    Path(path).write_bytes(b"".join(blob))


def load_checkpoint(path) -> ModelParams:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a parameter checkpoint (bad magic)")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    if off + hlen > len(raw):
        raise CheckpointError(f"{path}: truncated config block")
    try:
        header = json.loads(raw[off:off + hlen].decode())
        config = ModelConfig(**header["config"])
        seed = int(header["seed"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: malformed config block: {exc}") from exc
    off += hlen
    mp = init_params(config, seed=seed)
    total = 0
    for name, tensor in mp.params.items():
        count = tensor.size
        nbytes = count * 8
        if off + nbytes > len(raw) - 8:
            raise CheckpointError(f"{path}: truncated at parameter {name!r}")
        tensor.data = np.frombuffer(
            raw, dtype="<f8", count=count, offset=off).reshape(
                tensor.shape).astype(np.float64)
        off += nbytes
        total += count
    if off + 8 != len(raw):
        raise CheckpointError(
            f"{path}: {len(raw) - off - 8} unexpected trailing bytes")
    (declared,) = struct.unpack_from("<Q", raw, off)
    if declared != total:
        raise CheckpointError(
            f"{path}: checksum mismatch, header says {declared} floats, "
            f"read {total}")
    return mp
