"""Round-trip and corruption tests for the binary checkpoint format."""

import numpy as np
import pytest

from leftnet.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from leftnet.errors import CheckpointError
from leftnet.model import ModelConfig, energy_and_forces, init_params
from leftnet.datagen import random_molecule

CFG = ModelConfig(num_layers=2, hidden_dim=24, vector_channels=6, num_rbf=8)


def test_round_trip_bitwise(tmp_path):
    mp = init_params(CFG, seed=3)
    # perturb away from the freshly initialized values so a silent
    # re-init on load would be caught
    for t in mp.params.values():
        t.data = t.data + 0.01 * np.sin(np.arange(t.size)).reshape(t.shape)
    path = tmp_path / "model.ckpt"
    save_checkpoint(mp, path)
    back = load_checkpoint(path)
    assert back.config == mp.config
    assert back.seed == mp.seed
    assert list(back.params) == list(mp.params)
    for name in mp.params:
        assert np.array_equal(back.params[name].data, mp.params[name].data)


def test_round_trip_preserves_predictions(tmp_path):
    mp = init_params(CFG, seed=4)
    g = random_molecule(seed=11, n_atoms=7)
    e0, f0 = energy_and_forces(g, mp)
    path = tmp_path / "model.ckpt"
    save_checkpoint(mp, path)
    e1, f1 = energy_and_forces(g, load_checkpoint(path))
    assert e0 == e1
    assert np.array_equal(f0, f1)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(init_params(CFG, seed=0), path)
    raw = bytearray(path.read_bytes())
    raw[:8] = b"NOTAFILE"
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)


def test_truncated_file_rejected(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(init_params(CFG, seed=0), path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_trailing_garbage_rejected(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(init_params(CFG, seed=0), path)
    path.write_bytes(path.read_bytes() + b"\x00" * 16)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_malformed_config_rejected(tmp_path):
    import json
    import struct

    header = json.dumps({"config": {"no_such_field": 1}, "seed": 0}).encode()
    path = tmp_path / "model.ckpt"
    path.write_bytes(MAGIC + struct.pack("<Q", len(header)) + header
                     + struct.pack("<Q", 0))
    with pytest.raises(CheckpointError, match="config"):
        load_checkpoint(path)


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.ckpt"
    path.write_bytes(b"")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
