"""Loss assembly, Adam, and the desk-scale training loop.

Training is deliberately plain: full Python loop over shuffled minibatches,
a joint energy/force mean-squared loss, Adam with bias correction, and a
step-decay learning-rate schedule (factor 0.5).  Everything is deterministic
given the seed, and the loop keeps whichever parameters scored the best
validation error.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .errors import MissingLabels, NonFiniteGradient
from .graphs import GeometricGraph, from_positions
from .model import (ModelConfig, ModelParams, assemble, energy_forces_tensors,
                    forward_batch, init_params)

HISTORY_COLUMNS = ("epoch", "lr", "train_energy_mae", "train_force_mae",
                   "val_energy_mae", "val_force_mae")


@dataclass(frozen=True)
class LabeledGraph:
    """One training sample: geometry plus optional energy/force labels."""

    graph: GeometricGraph
    energy: float | None = None
    forces: np.ndarray | None = None


def labeled_from_frames(frames, cutoff: float) -> list[LabeledGraph]:
    """Build radius graphs at ``cutoff`` around labeled coordinate frames."""
    return [LabeledGraph(
        from_positions(s.positions, s.atomic_numbers, cutoff),
        s.energy, s.forces) for s in frames]


@dataclass(frozen=True)
class LossConfig:
    """Joint-loss weights; wofe is the weight of force over energy.

    Comparable force-field runs use wofe of 100 or 1000; anything
    nonnegative is accepted (0 turns the force term off entirely).
    """

    wofe: float = 100.0
    energy_weight: float = 1.0


def loss(batch: list[LabeledGraph], mp: ModelParams,
         cfg: LossConfig) -> ad.Tensor:
    """energy_weight * MSE(energies) + wofe * MSE(forces, per component).

    The force MSE averages over every atom and every Cartesian component of
    the whole batch.  Returns the scalar as a tape tensor so it can be
    differentiated; use ``.item()`` for the plain number.
    """
    if not batch:
        raise ValueError("loss needs a non-empty batch")
    missing = [k for k, s in enumerate(batch) if s.energy is None]
    if missing:
        raise MissingLabels(f"samples {missing} have no energy label")
    graphs = [s.graph for s in batch]
    e_true = ad.constant(np.asarray([[s.energy] for s in batch], dtype=float))
    if cfg.wofe:
        missing = [k for k, s in enumerate(batch) if s.forces is None]
        if missing:
            raise MissingLabels(f"samples {missing} have no force labels")
        energy, forces, _ = energy_forces_tensors(graphs, mp)
        f_true = ad.constant(np.concatenate(
            [np.asarray(s.forces, dtype=float).reshape(-1, 3) for s in batch]))
        df = ad.sub(forces, f_true)
        force_term = ad.mul(ad.constant(float(cfg.wofe)), ad.mean(ad.mul(df, df)))
    else:
        pos = ad.constant(assemble(graphs).positions)
        energy = forward_batch(graphs, mp, pos=pos)["graph_scalar"]
        force_term = None
    de = ad.sub(energy, e_true)
    total = ad.mul(ad.constant(float(cfg.energy_weight)),
                   ad.mean(ad.mul(de, de)))
    if force_term is not None:
        total = ad.add(total, force_term)
    return total


# ---------------------------------------------------------------------------
# optimizer


def _tensor_table(params) -> dict:
    """Accept a ModelParams or a bare name->Tensor dict."""
    return params.params if hasattr(params, "params") else params


@dataclass
class OptimizerState:
    """Adam moment accumulators plus the step-decay schedule state."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    lr: float = 1e-3
    decay_factor: float = 0.5

    @classmethod
    def fresh(cls, params, lr: float = 1e-3) -> "OptimizerState":
        table = _tensor_table(params)
        return cls(m={k: np.zeros_like(t.data) for k, t in table.items()},
                   v={k: np.zeros_like(t.data) for k, t in table.items()},
                   lr=lr)

    def decay(self):
        self.lr *= self.decay_factor


def adam_step(params, grads: dict[str, np.ndarray],
              state: OptimizerState, lr: float | None = None,
              beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> OptimizerState:
    """One in-place Adam update with bias correction.

    ``params`` is a ModelParams or a bare name->Tensor dict; ``grads`` maps
    parameter names to arrays (missing names mean zero gradient).  Raises
    NonFiniteGradient before touching any parameter if anything is NaN/inf.
    """
    table = _tensor_table(params)
    step_lr = state.lr if lr is None else lr
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"gradient for {name!r} is not finite")
        if g.shape != table[name].data.shape:
            raise ValueError(f"gradient shape {g.shape} does not match "
                             f"{name!r} {table[name].data.shape}")
    state.step += 1
    b1t = 1.0 - beta1 ** state.step
    b2t = 1.0 - beta2 ** state.step
    for name, g in grads.items():
        state.m[name] = beta1 * state.m[name] + (1 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1 - beta2) * g * g
        m_hat = state.m[name] / b1t
        v_hat = state.v[name] / b2t
        table[name].data = (table[name].data
                            - step_lr * m_hat / (np.sqrt(v_hat) + eps))
    return state


def param_gradients(total: ad.Tensor, params) -> dict[str, np.ndarray]:
    """Plain-array gradients of a scalar tape tensor for every parameter."""
    table = _tensor_table(params)
    names = list(table)
    grads = ad.gradients(total, [table[n] for n in names])
    return {n: g.data for n, g in zip(names, grads)}


def clone_params(mp: ModelParams) -> ModelParams:
    """Independent deep copy (fresh leaves, same config/seed)."""
    fresh = {k: ad.leaf(t.data.copy()) for k, t in mp.params.items()}
    return replace(mp, params=fresh)


# ---------------------------------------------------------------------------
# training loop


@dataclass(frozen=True)
class TrainConfig:
    """Budget and schedule for the desk-scale loop."""

    epochs: int = 30
    batch_size: int = 4
    lr: float = 1e-3
    decay_every: int = 10  # halve the learning rate every this many epochs
    seed: int = 0
    eval_batch_size: int = 16

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.decay_every < 1:
            raise ValueError("epochs, batch_size and decay_every must be >= 1")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")


def evaluate(mp: ModelParams, samples: list[LabeledGraph], with_forces: bool,
             batch_size: int = 16) -> tuple[float, float]:
    """(energy MAE, force MAE) over samples; force MAE is NaN when unused."""
    e_err, f_err, n_graphs, n_comp = 0.0, 0.0, 0, 0
    for k in range(0, len(samples), batch_size):
        chunk = samples[k:k + batch_size]
        graphs = [s.graph for s in chunk]
        if with_forces:
            energy, forces, _ = energy_forces_tensors(graphs, mp)
            pred_f = forces.data
            offset = 0
            for s in chunk:
                n = s.graph.num_nodes
                f_err += float(np.abs(pred_f[offset:offset + n]
                                      - s.forces).sum())
                n_comp += 3 * n
                offset += n
            pred_e = energy.data
        else:
            pred_e = forward_batch(graphs, mp)["graph_scalar"].data
        e_err += float(np.abs(pred_e[:, 0]
                              - np.asarray([s.energy for s in chunk])).sum())
        n_graphs += len(chunk)
    return (e_err / n_graphs,
            f_err / n_comp if with_forces else math.nan)


def train(dataset: tuple[list[LabeledGraph], list[LabeledGraph]],
          config: ModelConfig | ModelParams, loss_cfg: LossConfig,
          budget: TrainConfig | None = None
          ) -> tuple[ModelParams, list[dict]]:
    """Optimize on the train split, track the val split, keep the best.

    Returns (best-validation parameters, per-epoch history).  Model
    selection uses validation force MAE when the loss has a force term,
    validation energy MAE otherwise.  Deterministic per seed.
    """
    budget = budget or TrainConfig()
    train_set, val_set = dataset
    if not train_set or not val_set:
        raise ValueError("train() needs non-empty train and val splits")
    mp = (config if isinstance(config, ModelParams)
          else init_params(config, seed=budget.seed))
    state = OptimizerState.fresh(mp, lr=budget.lr)
    rng = random.Random(budget.seed)
    use_forces = bool(loss_cfg.wofe)
    history: list[dict] = []
    best_metric, best_params = math.inf, clone_params(mp)
    order = list(range(len(train_set)))
    for epoch in range(budget.epochs):
        rng.shuffle(order)
        for k in range(0, len(order), budget.batch_size):
            batch = [train_set[i] for i in order[k:k + budget.batch_size]]
            total = loss(batch, mp, loss_cfg)
            adam_step(mp, param_gradients(total, mp), state)
        tr_e, tr_f = evaluate(mp, train_set, use_forces,
                              budget.eval_batch_size)
        va_e, va_f = evaluate(mp, val_set, use_forces, budget.eval_batch_size)
        history.append({
            "epoch": epoch, "lr": state.lr,
            "train_energy_mae": tr_e, "train_force_mae": tr_f,
            "val_energy_mae": va_e, "val_force_mae": va_f,
        })
        metric = va_f if use_forces else va_e
        if metric < best_metric:
            best_metric, best_params = metric, clone_params(mp)
        if (epoch + 1) % budget.decay_every == 0:
            state.decay()
    return best_params, history


def history_csv_lines(history: list[dict]):
    """Render the metric history as CSV rows (header first)."""
    yield ",".join(HISTORY_COLUMNS)
    for row in history:
        yield ",".join(
            str(row[c]) if c == "epoch" else format(row[c], ".10g")
            for c in HISTORY_COLUMNS)
