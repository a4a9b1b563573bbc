"""Certification suites: symmetry, gradients, and substructure discrimination.

Each suite returns a list of Check rows so callers (CLI, tests) can render
a table, find the first failure, or pull out the measured numbers.
"""

from dataclasses import dataclass

import numpy as np

from .datagen import random_molecule
from .geometry import random_rotation
from .graphs import GeometricGraph, from_positions
from .isomorphism import (discrimination_test, distance_multiset_embedding,
                          generate_pair, isometry_suite)
from .model import (ModelConfig, ModelParams, energy_forces_tensors,
                    forward_batch, forward_result, init_params)

MIRROR = np.array([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class Check:
    """One named measurement compared against a bound."""

    name: str
    value: float
    bound: float
    sense: str  # "<=" or ">="

    def __post_init__(self):
        if self.sense not in ("<=", ">="):
            raise ValueError(f"sense must be <= or >=, got {self.sense!r}")

    @property
    def ok(self) -> bool:
        return (self.value <= self.bound if self.sense == "<="
                else self.value >= self.bound)


def first_failure(checks: list[Check]) -> Check | None:
    return next((c for c in checks if not c.ok), None)


def render_table(checks: list[Check]) -> str:
    wide = max(len(c.name) for c in checks)
    lines = [f"{'check':<{wide}}  {'value':>12}  {'bound':>12}  status"]
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        lines.append(f"{c.name:<{wide}}  {c.value:>12.4g}  "
                     f"{c.sense}{c.bound:>10.4g}  {status}")
    return "\n".join(lines)


def _moved_copy(g: GeometricGraph, rot: np.ndarray, shift: np.ndarray
                ) -> GeometricGraph:
    return from_positions(g.positions @ rot.T + shift, g.atomic_numbers,
                          g.cutoff)


def equivariance_checks(config: ModelConfig, n_molecules: int = 100,
                        n_motions: int = 20, seed: int = 0,
                        tol_scalar: float = 1e-9, tol_vector: float = 1e-9,
                        tol_force: float = 1e-8,
                        copies_per_batch: int = 5) -> list[Check]:
    """Invariance/equivariance deviations under random proper rigid motions.

    Each molecule rides in a disjoint-union batch together with a handful of
    moved copies, so the comparison also covers the batching path; the force
    tape for a full 20-copy batch of a 30-atom molecule would be gigabytes,
    hence the chunking.
    """
    rng = np.random.default_rng(seed)
    dev_s, dev_v, dev_f = 0.0, 0.0, 0.0
    for m in range(n_molecules):
        g = random_molecule(1_000_003 * seed + m)
        mp = init_params(config, seed=seed + 7_000 + m)
        rots = [np.array(random_rotation(31 * seed + n_motions * m + k).rotation)
                for k in range(n_motions)]
        shifts = rng.uniform(-5.0, 5.0, size=(n_motions, 3))
        moved = [_moved_copy(g, r, t) for r, t in zip(rots, shifts)]
        n = g.num_nodes
        for start in range(0, n_motions, copies_per_batch):
            chunk = rots[start:start + copies_per_batch]
            graphs = [g] + moved[start:start + copies_per_batch]
            energy, forces, out = energy_forces_tensors(graphs, mp)
            e0 = energy.data[0]
            f0 = forces.data[:n]
            v0 = out["v"].data[:n] if config.vector_channels else None
            for k, rot in enumerate(chunk, start=1):
                dev_s = max(dev_s, float(np.max(np.abs(energy.data[k] - e0))))
                fk = forces.data[k * n:(k + 1) * n]
                dev_f = max(dev_f, float(np.max(np.abs(fk - f0 @ rot.T))))
                if v0 is not None:
                    vk = out["v"].data[k * n:(k + 1) * n]
                    dev_v = max(dev_v, float(np.max(np.abs(vk - v0 @ rot.T))))
    return [
        Check("graph scalar invariance", dev_s, tol_scalar, "<="),
        Check("vector channel equivariance", dev_v, tol_vector, "<="),
        Check("force equivariance", dev_f, tol_force, "<="),
    ]


def reflection_checks(config: ModelConfig, n_seeds: int = 100,
                      seed: int = 0) -> list[Check]:
    """Mirror-image behaviour, direction depending on the configured mode.

    SE3 keeps chirality: the scalar should differ between a generic molecule
    and its mirror for nearly every parameter draw.  E3 must not see the
    reflection at all.
    """
    deltas = []
    for s in range(n_seeds):
        g = random_molecule(2_000_003 * seed + s, n_range=(6, 14))
        mirror = from_positions(g.positions * MIRROR, g.atomic_numbers,
                                g.cutoff)
        mp = init_params(config, seed=seed + 9_000 + s)
        out = forward_batch([g, mirror], mp)["graph_scalar"].data
        deltas.append(float(np.max(np.abs(out[0] - out[1]))))
    if config.mode == "E3":
        return [Check("reflection invariance (E3)", max(deltas), 1e-9, "<=")]
    rate = sum(d > 1e-6 for d in deltas) / len(deltas)
    return [Check("mirror discrimination rate (SE3)", rate, 0.9, ">=")]


def _fd_energy_gradient(g: GeometricGraph, mp: ModelParams, h: float = 1e-5,
                        chunk: int = 96) -> np.ndarray:
    """Central-difference d(energy)/d(positions) batched through the model."""
    perturbed = []
    for i in range(g.num_nodes):
        for axis in range(3):
            for sign in (h, -h):
                p = g.positions.copy()
                p[i, axis] += sign
                perturbed.append(from_positions(p, g.atomic_numbers, g.cutoff))
    vals = []
    for k in range(0, len(perturbed), chunk):
        out = forward_batch(perturbed[k:k + chunk], mp)
        vals.append(out["graph_scalar"].data[:, 0])
    flat = np.concatenate(vals)
    return ((flat[0::2] - flat[1::2]) / (2.0 * h)).reshape(g.num_nodes, 3)


def gradient_checks(config: ModelConfig, n_molecules: int = 100,
                    seed: int = 0, tol_rel: float = 1e-4,
                    tol_sum: float = 1e-8) -> list[Check]:
    """Tape forces vs finite differences, plus momentum conservation."""
    worst_rel, worst_sum = 0.0, 0.0
    for m in range(n_molecules):
        g = random_molecule(3_000_017 * seed + m, n_range=(5, 12))
        mp = init_params(config, seed=seed + 11_000 + m)
        _, forces, _ = energy_forces_tensors([g], mp)
        f = forces.data
        fd = _fd_energy_gradient(g, mp)
        rel = float(np.linalg.norm(f + fd) / max(np.linalg.norm(fd), 1e-12))
        worst_rel = max(worst_rel, rel)
        worst_sum = max(worst_sum, float(np.max(np.abs(f.sum(axis=0)))))
    return [
        Check("force vs finite-difference relative error", worst_rel,
              tol_rel, "<="),
        Check("net force magnitude", worst_sum, tol_sum, "<="),
    ]


def model_graph_embedding(params: ModelParams):
    """Pooled-representation closure for discrimination tests."""
    def embed(graph: GeometricGraph) -> np.ndarray:
        return forward_result(graph, params).graph_embedding
    return embed


def discrimination_checks(n_pairs: int = 100, seed: int = 0,
                          threshold: float = 1e-6,
                          config: ModelConfig | None = None
                          ) -> tuple[list[Check], dict]:
    """Distance-multiset vs substructure-aware embeddings on twist pairs.

    The pairs agree on every pairwise-distance multiset a one-hop
    distance encoder can see (tree-level isometric) while differing as
    rigid bodies, so the blind embedding must never separate them and the
    substructure-aware one nearly always should.  Model parameters are
    re-drawn per pair: discrimination should not hinge on a lucky draw.
    """
    if config is None:
        config = ModelConfig(num_layers=2, hidden_dim=32, vector_channels=8,
                             num_rbf=16, use_lse=True)
    blind_hits, lse_hits, blind_worst = 0, 0, 0.0
    for k in range(n_pairs):
        pair = generate_pair("tree_not_triangular", seed + k)
        lse_embed = model_graph_embedding(
            init_params(config, seed=seed + 17 + k))
        blind_hits += discrimination_test(distance_multiset_embedding, pair,
                                          threshold)
        lse_hits += discrimination_test(lse_embed, pair, threshold)
        diff = (distance_multiset_embedding(pair[0])
                - distance_multiset_embedding(pair[1]))
        blind_worst = max(blind_worst, float(np.linalg.norm(diff)))
    checks = [
        Check("distance-only embedding separation", blind_worst, 1e-8, "<="),
        Check("substructure embedding discrimination rate",
              lse_hits / n_pairs, 0.95, ">="),
    ]
    detail = {"blind_rate": blind_hits / n_pairs,
              "lse_rate": lse_hits / n_pairs,
              "blind_worst_diff": blind_worst,
              "pairs": n_pairs}
    return checks, detail


def hierarchy_checks(n_pairs: int = 1000, n_seeds: int = 100,
                     seed: int = 0) -> tuple[list[Check], dict]:
    """Implication ordering of the three isometry oracles, plus generators."""
    report = isometry_suite(n_pairs=n_pairs, n_seeds=n_seeds, seed=seed)
    checks = [
        Check("hierarchy implication violations",
              float(report["violations"]), 0.0, "<="),
        Check("generated pairs correctly classified",
              report["classified"] / n_seeds, 1.0, ">="),
    ]
    return checks, report
