"""Train/val splitting, ablation variant wiring, and experiment plumbing."""

from types import SimpleNamespace

import numpy as np
import pytest

from leftnet.experiments import (ABLATION_VARIANTS, _variant_config,
                                 ablation_experiment, force_field_experiment,
                                 force_rms, split_samples)
from leftnet.model import ModelConfig
from leftnet.training import TrainConfig


def test_split_is_deterministic_and_disjoint():
    items = list(range(40))
    tr1, va1 = split_samples(items, seed=5, val_fraction=0.2)
    tr2, va2 = split_samples(items, seed=5, val_fraction=0.2)
    assert (tr1, va1) == (tr2, va2)
    assert len(va1) == 8 and len(tr1) == 32
    assert set(tr1) | set(va1) == set(items)
    assert set(tr1) & set(va1) == set()
    _, va3 = split_samples(items, seed=6, val_fraction=0.2)
    assert va3 != va1


def test_split_validation_never_empty_but_training_must_not_be():
    _, va = split_samples(list(range(8)), seed=0, val_fraction=0.0)
    assert len(va) == 1
    with pytest.raises(ValueError):
        split_samples(list(range(3)), seed=0, val_fraction=0.9)


def test_force_rms_hand_value():
    samples = [SimpleNamespace(forces=np.array([[3.0, 0.0, 0.0]])),
               SimpleNamespace(forces=np.array([[0.0, 4.0, 0.0]]))]
    assert force_rms(samples) == pytest.approx(np.sqrt(25.0 / 6.0))


def test_variant_configs_toggle_the_right_switches():
    base = ModelConfig(num_layers=2, hidden_dim=16, vector_channels=8)
    plain = _variant_config(base, "plain")
    assert plain.use_lse is False and plain.vector_channels == 0
    lse_only = _variant_config(base, "lse_only")
    assert lse_only.use_lse is True and lse_only.vector_channels == 0
    assert _variant_config(base, "full") == base
    with pytest.raises(ValueError):
        _variant_config(base, "everything")
    assert ABLATION_VARIANTS == ("plain", "lse_only", "full")


def test_force_field_experiment_micro_run():
    res = force_field_experiment(
        kind="lj_dimer", n_samples=32, seed=0,
        config=ModelConfig(num_layers=1, hidden_dim=8, vector_channels=4,
                           num_rbf=6),
        train_cfg=TrainConfig(epochs=2, batch_size=8, lr=3e-3, seed=0))
    assert res.init_val_force_mae > 0
    assert res.best_val_force_mae <= res.init_val_force_mae
    assert res.val_force_rms > 0
    assert len(res.history) == 2
    assert res.improvement == pytest.approx(
        res.init_val_force_mae / res.best_val_force_mae)
    assert res.mae_over_rms == pytest.approx(
        res.best_val_force_mae / res.val_force_rms)


def test_ablation_experiment_micro_run():
    out = ablation_experiment(
        seeds=(0,), n_samples=24,
        config=ModelConfig(num_layers=1, hidden_dim=8, vector_channels=4,
                           num_rbf=6, cutoff=3.2),
        train_cfg=TrainConfig(epochs=1, batch_size=8, lr=3e-3))
    assert set(out["means"]) == set(ABLATION_VARIANTS)
    assert all(len(v) == 1 for v in out["per_variant"].values())
    assert len(out["runs"]) == 3
    assert all(r["val_force_mae"] > 0 for r in out["runs"])
    assert {r["variant"] for r in out["runs"]} == set(ABLATION_VARIANTS)
