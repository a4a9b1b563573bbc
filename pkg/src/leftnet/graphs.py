"""Geometric graphs: radius edges, mutual substructures, radial basis."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, EmptyGraph, NotAnEdge


@dataclass(eq=False)
class GeometricGraph:
    """A molecule-scale point cloud with a symmetric directed edge set.

    positions are Å, shape (n, 3); node_features defaults to the atomic
    number as a single-column float feature.
    """

    positions: np.ndarray
    atomic_numbers: np.ndarray
    node_features: np.ndarray
    edges: np.ndarray  # (E, 2) int, both directions, no self-loops
    cutoff: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.atomic_numbers = np.asarray(self.atomic_numbers, dtype=np.intp)
        self.edges = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        if self.node_features is None:
            self.node_features = self.atomic_numbers[:, None].astype(np.float64)
        self.node_features = np.asarray(self.node_features, dtype=np.float64)
        if self.node_features.ndim == 1:
            self.node_features = self.node_features[:, None]

    @property
    def num_nodes(self) -> int:
        return len(self.positions)

    def neighbors(self, i: int) -> set[int]:
        return {int(j) for a, j in self.edges if a == i}


def from_positions(positions, atomic_numbers, cutoff: float,
                   node_features=None) -> GeometricGraph:
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    edges = build_radius_graph(positions, cutoff)
    return GeometricGraph(positions, np.asarray(atomic_numbers, dtype=np.intp),
                          node_features, edges, float(cutoff))


@dataclass
class Substructure:
    """Nodes visible from both ends of an edge: {i, j} plus common neighbors."""

    center_edge: tuple[int, int]
    member_nodes: list[int]
    member_positions: np.ndarray
    member_features: np.ndarray
    internal_edges: list[tuple[int, int]]


@dataclass
class RbfConfig:
    num_basis: int
    cutoff: float
    kind: str = "gaussian"
    gamma: float | None = None
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.num_basis < 1:
            raise ConfigError(f"num_basis must be >= 1, got {self.num_basis}")
        if self.cutoff <= 0:
            raise ConfigError(f"cutoff must be positive, got {self.cutoff}")
        if self.kind != "gaussian":
            raise ConfigError(f"unknown rbf kind {self.kind!r}")
        if self.gamma is None:
            self.gamma = 10.0 / self.cutoff ** 2
        self.centers = np.linspace(0.0, self.cutoff, self.num_basis)


def centralize(positions) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the centroid; returns (centered positions, removed CoM)."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) == 0:
        raise EmptyGraph("cannot centralize an empty position list")
    com = positions.mean(axis=0)
    return positions - com, com


def build_radius_graph(positions, cutoff: float) -> np.ndarray:
    """All ordered pairs within `cutoff` (boundary inclusive), no self-loops."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if cutoff <= 0:
        raise ConfigError(f"cutoff must be positive, got {cutoff}")
    if len(positions) < 2:
        return np.zeros((0, 2), dtype=np.intp)
    pairs = cKDTree(positions).query_pairs(r=cutoff, output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.intp)
    both = np.concatenate([pairs, pairs[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    return both[order].astype(np.intp)


def mutual_substructure(g: GeometricGraph, i: int, j: int) -> Substructure:
    """Members {i, j} plus all common 1-hop neighbors, with internal edges."""
    edge_set = {(int(a), int(b)) for a, b in g.edges}
    if (i, j) not in edge_set:
        raise NotAnEdge(f"({i}, {j}) is not an edge of the graph")
    common = (g.neighbors(i) & g.neighbors(j)) - {i, j}
    members = [i, j] + sorted(common)
    member_set = set(members)
    internal = [(a, b) for a, b in edge_set
                if a in member_set and b in member_set]
    internal.sort()
    return Substructure(
        center_edge=(i, j),
        member_nodes=members,
        member_positions=g.positions[members],
        member_features=g.node_features[members],
        internal_edges=internal,
    )


def rbf_embed(d: float, cfg: RbfConfig) -> np.ndarray:
    """Gaussian radial basis under a smooth cosine cutoff envelope."""
    if d < 0:
        raise ValueError(f"distance must be nonnegative, got {d}")
    if d > cfg.cutoff:
        return np.zeros(cfg.num_basis)
    envelope = 0.5 * (np.cos(np.pi * d / cfg.cutoff) + 1.0)
    return np.exp(-cfg.gamma * (d - cfg.centers) ** 2) * envelope
