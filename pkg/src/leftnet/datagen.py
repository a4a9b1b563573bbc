"""Synthetic geometry and dataset generators used by tests and the CLI."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import GenerationFailed
from .graphs import GeometricGraph, build_radius_graph, centralize, from_positions

# margin constants: generated geometries stay well clear of the frame
# degeneracy threshold and of the cutoff boundary, so that masks and edge
# sets are stable under rotation and under finite-difference steps
_CUTOFF_MARGIN = 1e-3
_CROSS_MARGIN = 1e-4
_EXACT_ZERO = 1e-10
_COM_MARGIN = 1e-3


def _sample_points(rng: np.random.Generator, n: int, box: float,
                   min_dist: float) -> np.ndarray | None:
    pts = np.zeros((0, 3))
    for _ in range(60):
        cand = rng.uniform(0.0, box, (4 * n, 3))
        for c in cand:
            if len(pts) == n:
                return pts
            if len(pts) == 0 or np.min(
                    np.linalg.norm(pts - c, axis=1)) > min_dist:
                pts = np.vstack([pts, c])
    return pts if len(pts) == n else None


def _margins_ok(pos: np.ndarray, cutoff: float) -> bool:
    centered, _ = centralize(pos)
    n = len(centered)
    # atoms sitting on the centroid break the substructure radial embedding
    if np.min(np.linalg.norm(centered, axis=1)) < _COM_MARGIN:
        return False
    dists = np.linalg.norm(centered[:, None] - centered[None, :], axis=2)
    iu = np.triu_indices(n, 1)
    # no pair distance may straddle the cutoff sphere
    if np.min(np.abs(dists[iu] - cutoff)) < _CUTOFF_MARGIN:
        return False
    edges = build_radius_graph(centered, cutoff)
    if len(edges) == 0:
        return False
    # edge frames: cross products clearly away from the degeneracy threshold
    cr = np.linalg.norm(
        np.cross(centered[edges[:, 0]], centered[edges[:, 1]]), axis=1)
    if np.any(cr < _CROSS_MARGIN):
        return False
    # node frames: either robustly valid or structurally degenerate
    for i in range(n):
        nb = edges[edges[:, 0] == i, 1]
        if len(nb) == 0:
            continue
        xbar = centered[nb].mean(axis=0)
        for val in (np.linalg.norm(np.cross(xbar, centered[i])),
                    np.linalg.norm(centered[i] - xbar)):
            if _EXACT_ZERO < val < _CROSS_MARGIN:
                return False
    return True


def random_molecule(seed: int, n_atoms: int | None = None,
                    n_range: tuple[int, int] = (5, 30), cutoff: float = 5.0,
                    target_degree: float = 9.0, min_dist: float = 0.9,
                    max_z: int = 10) -> GeometricGraph:
    """A random bounded-degree molecule with degeneracy-safe margins.

    Degeneracy margins make the forward pass's masks stable under rotations
    and finite-difference perturbations, which the equivariance and gradient
    acceptance checks rely on.
    """
    rng = np.random.default_rng(seed)
    n = int(n_atoms) if n_atoms else int(rng.integers(n_range[0], n_range[1] + 1))
    box = max(cutoff, (n * 4.18879 * cutoff ** 3 / target_degree) ** (1 / 3))
    for _ in range(200):
        pts = _sample_points(rng, n, box, min_dist)
        if pts is None or not _margins_ok(pts, cutoff):
            continue
        z = rng.integers(1, max_z + 1, n)
        return from_positions(pts, z, cutoff)
    raise GenerationFailed(
        f"no margin-satisfying {n}-atom configuration after 200 attempts "
        f"(seed {seed})")


# ---------------------------------------------------------------------------
# analytic pair potentials and dataset sampling


@dataclass(frozen=True)
class PotentialSample:
    """One labeled frame: geometry plus analytic energy (and maybe forces)."""

    positions: np.ndarray
    atomic_numbers: np.ndarray
    energy: float
    forces: np.ndarray | None = None


def lj_energy_forces(positions, sigma: float = 2.0, epsilon: float = 1.0
                     ) -> tuple[float, np.ndarray]:
    """Lennard-Jones 12-6 over all pairs with analytic forces.

    v(r) = 4 eps ((sigma/r)^12 - (sigma/r)^6); the minimum sits at
    2^(1/6) sigma where the pair force vanishes exactly.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    energy = 0.0
    forces = np.zeros_like(pos)
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            rij = pos[i] - pos[j]
            r = float(np.linalg.norm(rij))
            s6 = (sigma / r) ** 6
            energy += 4.0 * epsilon * (s6 * s6 - s6)
            dv = 24.0 * epsilon * (s6 - 2.0 * s6 * s6) / r
            pair_force = -dv * rij / r
            forces[i] += pair_force
            forces[j] -= pair_force
    return energy, forces


def morse_energy_forces(positions, well_depth: float = 1.0,
                        width: float = 0.8, r_min: float = 2.2
                        ) -> tuple[float, np.ndarray]:
    """Morse well over all pairs: v(r) = D (e^{-2a(r-re)} - 2 e^{-a(r-re)}).

    All pairs interact regardless of any graph cutoff, so models with a
    finite receptive field must infer the tail from local structure.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    energy = 0.0
    forces = np.zeros_like(pos)
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            rij = pos[i] - pos[j]
            r = float(np.linalg.norm(rij))
            e1 = math.exp(-width * (r - r_min))
            energy += well_depth * (e1 * e1 - 2.0 * e1)
            dv = 2.0 * width * well_depth * (e1 - e1 * e1)
            pair_force = -dv * rij / r
            forces[i] += pair_force
            forces[j] -= pair_force
    return energy, forces


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n


def _lj_dimer_sample(rng: np.random.Generator) -> PotentialSample:
    r = float(rng.uniform(2.0, 3.4))
    axis = _random_unit(rng)
    center = rng.uniform(-2.0, 2.0, 3)
    pos = np.stack([center - 0.5 * r * axis, center + 0.5 * r * axis])
    energy, forces = lj_energy_forces(pos)
    return PotentialSample(pos, np.asarray([18, 18], dtype=np.intp),
                           energy, forces)


def _morse_cluster_sample(rng: np.random.Generator, n_atoms: int = 6
                          ) -> PotentialSample:
    """Gas-phase cluster with no pair on the repulsive wall.

    The minimum pair distance sits near the Morse equilibrium, so the
    force field is dominated by mid- and long-range attraction rather
    than near-contact repulsion; cluster density varies so both compact
    and strung-out neighborhoods appear.
    """
    for _ in range(200):
        box = float(rng.uniform(4.7, 5.5))
        pts = _sample_points(rng, n_atoms, box=box, min_dist=2.05)
        if pts is None:
            continue
        centered, _ = centralize(pts)
        dists = np.linalg.norm(centered[:, None] - centered[None, :], axis=2)
        iu = np.triu_indices(n_atoms, 1)
        if dists[iu].max() > 7.5:
            continue
        energy, forces = morse_energy_forces(centered)
        return PotentialSample(centered,
                               np.full(n_atoms, 18, dtype=np.intp),
                               energy, forces)
    raise GenerationFailed("no admissible morse cluster after 200 attempts")


def two_hop_geometry(rng: np.random.Generator
                     ) -> tuple[np.ndarray, float]:
    """Central atom bonded to two 3-atom clusters; the label is the dot
    product of the clusters' first frame axes (a pure relative-orientation
    quantity, invariant under global rotation).

    Atom order: center a, then b, b1, b2, then c, c1, c2.
    """
    while True:
        u, v = _random_unit(rng), _random_unit(rng)
        cos_bc = float(u @ v)
        if not -0.9 < cos_bc < -0.1:  # keep the two clusters apart
            continue
        b = u * rng.uniform(2.2, 2.8)
        c = v * rng.uniform(2.2, 2.8)
        p, q = _random_unit(rng), _random_unit(rng)
        s, t = _random_unit(rng), _random_unit(rng)
        if (np.linalg.norm(np.cross(p, q)) < 0.3
                or np.linalg.norm(np.cross(s, t)) < 0.3):
            continue
        b1 = b + p * rng.uniform(1.0, 1.4)
        b2 = b + q * rng.uniform(1.0, 1.4)
        c1 = c + s * rng.uniform(1.0, 1.4)
        c2 = c + t * rng.uniform(1.0, 1.4)
        pos = np.stack([np.zeros(3), b, b1, b2, c, c1, c2])
        dists = np.linalg.norm(pos[:, None] - pos[None, :], axis=2)
        if (dists + np.eye(7) * 9).min() < 0.9:
            continue
        target = float(p @ s)  # unit(b1-b) . unit(c1-c)
        return pos, target


def _two_hop_sample(rng: np.random.Generator) -> PotentialSample:
    pos, target = two_hop_geometry(rng)
    return PotentialSample(pos, np.asarray([6, 7, 1, 1, 7, 1, 1], np.intp),
                           target, None)


_SAMPLERS = {
    "lj_dimer": _lj_dimer_sample,
    "morse_cluster": _morse_cluster_sample,
    "two_hop_probe": _two_hop_sample,
}

DATASET_KINDS = tuple(sorted(_SAMPLERS))


def sample_frames(kind: str, n_samples: int, seed: int
                  ) -> list[PotentialSample]:
    """Deterministic labeled frames for the named synthetic task."""
    try:
        sampler = _SAMPLERS[kind]
    except KeyError:
        raise ValueError(f"unknown dataset kind {kind!r}; expected one of "
                         f"{DATASET_KINDS}") from None
    rng = np.random.default_rng(
        np.random.SeedSequence([zlib.crc32(kind.encode()), seed]))
    return [sampler(rng) for _ in range(n_samples)]
