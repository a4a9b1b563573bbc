"""Radius graphs and substructures against brute-force oracles."""

import numpy as np
import pytest

from leftnet.errors import ConfigError, EmptyGraph, NotAnEdge
from leftnet.geometry import random_rotation
from leftnet.graphs import (
    RbfConfig,
    build_radius_graph,
    centralize,
    from_positions,
    mutual_substructure,
    rbf_embed,
)


def brute_force_edges(pos: np.ndarray, cutoff: float) -> set[tuple[int, int]]:
    n = len(pos)
    return {
        (i, j)
        for i in range(n)
        for j in range(n)
        if i != j and np.linalg.norm(pos[i] - pos[j]) <= cutoff
    }


def random_cloud(seed: int, n: int = 20, box: float = 6.0) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-box / 2, box / 2, (n, 3))


# ---------------------------------------------------------------------------
# centralize


def test_centralize_already_centered():
    out, com = centralize([[1, 0, 0], [-1, 0, 0]])
    assert np.allclose(out, [[1, 0, 0], [-1, 0, 0]])
    assert np.allclose(com, 0.0)


def test_centralize_single_point():
    out, com = centralize([[2, 2, 2]])
    assert np.allclose(out, 0.0)
    assert np.allclose(com, [2, 2, 2])


@pytest.mark.parametrize("seed", range(5))
def test_centralize_random_cloud_mean_vanishes(seed):
    out, com = centralize(random_cloud(seed))
    assert np.linalg.norm(out.mean(axis=0)) < 1e-12
    assert np.allclose(out + com, random_cloud(seed))


def test_centralize_empty_raises():
    with pytest.raises(EmptyGraph):
        centralize(np.zeros((0, 3)))


# ---------------------------------------------------------------------------
# radius graph


def test_boundary_distance_is_inclusive():
    edges = build_radius_graph([[0, 0, 0], [5.0, 0, 0]], 5.0)
    assert sorted(map(tuple, edges)) == [(0, 1), (1, 0)]
    assert len(build_radius_graph([[0, 0, 0], [5.0001, 0, 0]], 5.0)) == 0


@pytest.mark.parametrize("seed", range(10))
def test_edges_match_brute_force(seed):
    pos = random_cloud(seed)
    got = set(map(tuple, build_radius_graph(pos, 3.0)))
    assert got == brute_force_edges(pos, 3.0)


def test_edge_set_symmetric_no_self_loops():
    pos = random_cloud(3, n=30)
    edges = set(map(tuple, build_radius_graph(pos, 4.0)))
    assert all(i != j for i, j in edges)
    assert all((j, i) in edges for i, j in edges)


def test_edges_invariant_under_rigid_motion():
    pos = random_cloud(7)
    R = np.array(random_rotation(11).rotation)
    moved = pos @ R.T + np.array([1.0, -2.0, 0.5])
    e0 = set(map(tuple, build_radius_graph(pos, 3.0)))
    e1 = set(map(tuple, build_radius_graph(moved, 3.0)))
    assert e0 == e1


# ---------------------------------------------------------------------------
# mutual substructures


def graph_from_edges(n, pairs, cutoff=5.0):
    # positions chosen on a line far apart so the geometry doesn't add edges;
    # we override the edge set to the requested topology
    g = from_positions(np.arange(n)[:, None] * [100.0, 0, 0], [6] * n, cutoff)
    both = sorted(set(pairs) | {(j, i) for i, j in pairs})
    g.edges = np.array(both, dtype=np.intp)
    return g


def test_triangle_substructure_contains_all_three():
    g = graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])
    s = mutual_substructure(g, 0, 1)
    assert s.member_nodes == [0, 1, 2]
    assert set(s.internal_edges) == {(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)}


def test_path_substructure_is_endpoints_only():
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    s = mutual_substructure(g, 0, 1)
    assert s.member_nodes == [0, 1]
    assert set(s.internal_edges) == {(0, 1), (1, 0)}


def test_non_edge_raises():
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(NotAnEdge):
        mutual_substructure(g, 0, 2)


@pytest.mark.parametrize("seed", range(8))
def test_substructure_matches_set_intersection_oracle(seed):
    pos = random_cloud(seed)
    g = from_positions(pos, [6] * len(pos), 3.0)
    nbrs = {}
    for i, j in brute_force_edges(pos, 3.0):
        nbrs.setdefault(i, set()).add(j)
    for i, j in map(tuple, g.edges[:25]):
        s = mutual_substructure(g, i, j)
        expect = {i, j} | ((nbrs.get(i, set()) & nbrs.get(j, set())) - {i, j})
        assert set(s.member_nodes) == expect
        assert s.member_nodes[:2] == [i, j]
        # symmetry of membership
        assert set(mutual_substructure(g, j, i).member_nodes) == expect
        # positions/features line up with node order
        assert np.allclose(s.member_positions, pos[s.member_nodes])


def test_substructure_invariant_under_rigid_motion():
    pos = random_cloud(2)
    R = np.array(random_rotation(5).rotation)
    g0 = from_positions(pos, [6] * len(pos), 3.0)
    g1 = from_positions(pos @ R.T + [0.3, 0.1, -2.0], [6] * len(pos), 3.0)
    i, j = map(int, g0.edges[0])
    s0, s1 = mutual_substructure(g0, i, j), mutual_substructure(g1, i, j)
    assert s0.member_nodes == s1.member_nodes
    assert s0.internal_edges == s1.internal_edges


# ---------------------------------------------------------------------------
# radial basis


def test_rbf_zero_at_cutoff():
    cfg = RbfConfig(num_basis=8, cutoff=5.0)
    assert np.max(np.abs(rbf_embed(5.0, cfg))) < 1e-15
    assert np.all(rbf_embed(6.3, cfg) == 0.0)


def test_rbf_first_component_is_one_at_zero():
    cfg = RbfConfig(num_basis=8, cutoff=5.0)
    v = rbf_embed(0.0, cfg)
    assert abs(v[0] - 1.0) < 1e-15
    assert cfg.centers[0] == 0.0 and cfg.centers[-1] == 5.0


def test_rbf_range_and_continuity():
    cfg = RbfConfig(num_basis=16, cutoff=5.0)
    rng = np.random.default_rng(0)
    for d in rng.uniform(0, 7, 200):
        v = rbf_embed(float(d), cfg)
        assert np.all(v >= 0.0) and np.all(v <= 1.0)
    assert np.max(rbf_embed(5.0 - 1e-9, cfg)) < 1e-8


def test_rbf_default_gamma():
    cfg = RbfConfig(num_basis=4, cutoff=2.0)
    assert abs(cfg.gamma - 10.0 / 4.0) < 1e-15


def test_rbf_config_validation():
    with pytest.raises(ConfigError):
        RbfConfig(num_basis=0, cutoff=5.0)
    with pytest.raises(ConfigError):
        RbfConfig(num_basis=4, cutoff=-1.0)
    with pytest.raises(ConfigError):
        RbfConfig(num_basis=4, cutoff=5.0, kind="bessel")


def test_default_node_features_are_atomic_numbers():
    g = from_positions([[0, 0, 0], [1, 0, 0]], [6, 8], 5.0)
    assert np.allclose(g.node_features, [[6.0], [8.0]])
