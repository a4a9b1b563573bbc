"""Oracle tests: alignment, the three isometry levels, generators, probes."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leftnet.errors import TooLarge
from leftnet.geometry import (Frame, Vec3, frame_transition, gram_schmidt,
                              random_rotation)
from leftnet.graphs import GeometricGraph
from leftnet.isomorphism import (ALIGN_TOL, IsometryReport, LocalSubgraph,
                                 discrimination_test,
                                 distance_multiset_embedding,
                                 fa_identity_check, ft_from_messages,
                                 generate_pair, isometry_suite, kabsch_se3,
                                 local_subgraph, subgraph_isometric,
                                 tree_isometric, triangular_isometric)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def rotmat(seed: int) -> np.ndarray:
    return np.asarray(random_rotation(seed).rotation, dtype=float)


def star_graph(positions, zs, extra_edges=()) -> GeometricGraph:
    """Center node 0 plus spokes to every other node."""
    und = sorted({(0, i) for i in range(1, len(positions))} | set(extra_edges))
    both = np.asarray(und + [(j, i) for i, j in und], dtype=np.intp)
    return GeometricGraph(np.asarray(positions, float),
                          np.asarray(zs, np.intp), None, both, 10.0)


# ---------------------------------------------------------------------------
# kabsch


def test_kabsch_identity_on_equal_sets():
    pts = np.asarray([[0.0, 0, 0], [1, 0, 0], [0, 2, 0], [0, 0, 3]])
    rot, t, rmsd = kabsch_se3(pts, pts)
    assert np.allclose(np.asarray(rot), np.eye(3), atol=1e-12)
    assert np.allclose(tuple(t), 0.0, atol=1e-12)
    assert rmsd < 1e-12


def test_kabsch_recovers_rigid_motion():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(6, 3))
    r_true = rotmat(3)
    moved = pts @ r_true.T + np.asarray([0.5, -2.0, 1.0])
    rot, t, rmsd = kabsch_se3(pts, moved)
    assert rmsd < 1e-10
    rebuilt = pts @ np.asarray(rot).T + np.asarray(tuple(t))
    assert np.allclose(rebuilt, moved, atol=1e-9)
    assert np.allclose(np.asarray(rot), r_true, atol=1e-9)


def test_kabsch_mirror_of_chiral_set_keeps_positive_rmsd():
    # signed volume flips under the mirror, so no proper rotation can win
    pts = np.asarray([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    vol = np.linalg.det(pts[1:] - pts[0])
    mirrored = pts * np.asarray([1.0, 1.0, -1.0])
    assert np.linalg.det(mirrored[1:] - mirrored[0]) == -vol
    _, _, rmsd = kabsch_se3(pts, mirrored)
    assert rmsd > 0.1
    assert np.asarray(kabsch_se3(pts, mirrored)[0]).round(6).tolist()  # proper
    assert np.isclose(np.linalg.det(np.asarray(kabsch_se3(pts, mirrored)[0])), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 8))
def test_kabsch_zero_rmsd_on_proper_congruent_sets(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3)) * 2
    moved = pts @ rotmat(seed + 1).T + rng.normal(size=3)
    rot, t, rmsd = kabsch_se3(pts, moved)
    assert rmsd <= 1e-10
    assert np.allclose(pts @ np.asarray(rot).T + tuple(t), moved, atol=1e-8)


def test_kabsch_rejects_mismatched_inputs():
    with pytest.raises(ValueError):
        kabsch_se3([(0, 0, 0)], [(0, 0, 0), (1, 0, 0)])
    with pytest.raises(ValueError):
        kabsch_se3([], [])


# ---------------------------------------------------------------------------
# local subgraphs


def test_local_subgraph_membership_and_edges():
    g = star_graph([[0, 0, 0], [1.5, 0, 0], [0, 1.5, 0], [4, 4, 4]],
                   [6, 1, 1, 1], extra_edges=[(1, 2)])
    # node 3 is adjacent to the center too (star), so everything is included
    sub = local_subgraph(g, 0)
    assert sub.nodes == (0, 1, 2, 3)
    assert (1, 2) in sub.edges and (0, 1) in sub.edges
    sub1 = local_subgraph(g, 1)
    assert set(sub1.nodes) == {1, 0, 2}
    assert sub1.center == 1


def test_local_subgraph_invariants_enforced():
    with pytest.raises(ValueError):
        LocalSubgraph(center=9, nodes=(0, 1), positions=np.zeros((2, 3)),
                      features=np.zeros((2, 1)), edges=frozenset({(0, 1)}))
    with pytest.raises(ValueError):  # node 2 floats free of the center
        LocalSubgraph(center=0, nodes=(0, 1, 2), positions=np.zeros((3, 3)),
                      features=np.zeros((3, 1)),
                      edges=frozenset({(0, 1), (1, 2)}))


def test_isometry_report_consistency_guard():
    with pytest.raises(ValueError):
        IsometryReport("tree", True, None, 0.5)


# ---------------------------------------------------------------------------
# the three levels


def chain_pair(perturb=0.0, twist=0.0, seed=0):
    """Two 4-atom neighborhoods; twist moves a dihedral, perturb an edge length."""
    base = np.asarray([[0.0, 0, 0], [1.4, 0, 0], [-0.5, 1.3, 0],
                       [-0.4, -0.9, 1.0]])
    other = base.copy()
    other[1, 0] += perturb
    if twist:
        c, s = math.cos(twist), math.sin(twist)
        y, z = other[3, 1], other[3, 2]
        other[3, 1], other[3, 2] = c * y - s * z, s * y + c * z
    r = rotmat(seed)
    other = other @ r.T + np.asarray([1.0, 2.0, 3.0])
    zs = [6, 1, 7, 8]
    return (local_subgraph(star_graph(base, zs), 0),
            local_subgraph(star_graph(other, zs), 0))


def test_tree_isometric_on_identical_and_moved_copies():
    a, b = chain_pair()
    rep = tree_isometric(a, b)
    assert rep.isometric and rep.residual <= 1e-9
    assert rep.witness.bijection[0] == 0
    assert tree_isometric(a, a).isometric


def test_tree_isometric_rejects_length_change():
    a, b = chain_pair(perturb=0.1)
    rep = tree_isometric(a, b)
    assert not rep.isometric
    assert rep.residual == pytest.approx(0.1, abs=1e-9)


def test_tree_isometric_rejects_feature_change():
    a, _ = chain_pair()
    feats = a.features.copy()
    feats[2, 0] += 1
    b = LocalSubgraph(a.center, a.nodes, a.positions.copy(), feats, a.edges)
    assert not tree_isometric(a, b).isometric


def test_tree_level_is_blind_to_pure_dihedral_twists():
    # center-edge lengths don't change, so the tree oracle must accept
    a, b = chain_pair(twist=0.8)
    assert tree_isometric(a, b).isometric


def test_subgraph_isometric_accepts_rigid_copy_and_reports_motion():
    a, b = chain_pair()
    rep = subgraph_isometric(a, b)
    assert rep.isometric and rep.residual <= 1e-9
    motion = rep.witness.motions[a.center]
    moved = np.asarray(a.positions) @ np.asarray(motion.rotation).T
    moved = moved + np.asarray(tuple(motion.translation))
    order = [b.index(rep.witness.bijection[n]) for n in a.nodes]
    assert np.allclose(moved, b.positions[order], atol=1e-8)


def test_subgraph_isometric_rejects_twist():
    a, b = chain_pair(twist=0.8)
    rep = subgraph_isometric(a, b)
    assert not rep.isometric
    assert rep.residual > 0.05


def test_too_large_neighborhood_raises():
    n = 9
    pts = [[0.0, 0, 0]] + [[2 * math.cos(k), 2 * math.sin(k), 0.1 * k]
                           for k in range(n)]
    sub = local_subgraph(star_graph(pts, [6] + [1] * n), 0)
    with pytest.raises(TooLarge):
        subgraph_isometric(sub, sub)
    with pytest.raises(TooLarge):
        triangular_isometric(sub, sub)


def test_triangular_too_large_substructure_raises():
    # complete neighborhood on 9 common members -> substructure of 10 nodes
    n = 9
    rng = np.random.default_rng(0)
    pts = np.vstack([np.zeros(3), rng.normal(size=(n, 3)) * 2])
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    sub = local_subgraph(star_graph(pts, [6] + [1] * n, edges), 0)
    with pytest.raises(TooLarge):
        triangular_isometric(sub, sub)


# ---------------------------------------------------------------------------
# generators and hierarchy


@pytest.mark.parametrize("seed", [0, 1, 2, 5, 11])
def test_generated_tree_pairs_separate_levels(seed):
    ga, gb = generate_pair("tree_not_triangular", seed)
    la, lb = local_subgraph(ga, 0), local_subgraph(gb, 0)
    assert tree_isometric(la, lb).isometric
    assert not triangular_isometric(la, lb).isometric
    assert not subgraph_isometric(la, lb).isometric


@pytest.mark.parametrize("seed", [0, 1, 2, 5, 11])
def test_generated_triangular_pairs_separate_levels(seed):
    ga, gb = generate_pair("triangular_not_subgraph", seed)
    la, lb = local_subgraph(ga, 0), local_subgraph(gb, 0)
    assert tree_isometric(la, lb).isometric
    assert triangular_isometric(la, lb).isometric
    assert not subgraph_isometric(la, lb).isometric


def test_generate_pair_is_deterministic():
    a1, b1 = generate_pair("tree_not_triangular", 4)
    a2, b2 = generate_pair("tree_not_triangular", 4)
    assert np.array_equal(a1.positions, a2.positions)
    assert np.array_equal(b1.positions, b2.positions)
    assert np.array_equal(a1.edges, a2.edges)


def test_generate_pair_unknown_kind():
    with pytest.raises(ValueError):
        generate_pair("nope", 0)


def test_hierarchy_implications_hold_on_random_pairs():
    report = isometry_suite(n_pairs=150, n_seeds=5, seed=7)
    assert report["violations"] == 0
    assert report["classified"] == 5
    # the sweep actually exercises distinct outcome patterns
    assert len(report["outcomes"]) >= 3


def test_oracles_invariant_under_rigid_motion_of_either_input():
    rng = random.Random(3)
    ga, gb = generate_pair("triangular_not_subgraph", 9)
    la, lb = local_subgraph(ga, 0), local_subgraph(gb, 0)
    rot = rotmat(17)
    moved = LocalSubgraph(lb.center, lb.nodes,
                          lb.positions @ rot.T + np.asarray([1.0, -2.0, 0.5]),
                          lb.features.copy(), lb.edges)
    for oracle in (tree_isometric, triangular_isometric, subgraph_isometric):
        assert oracle(la, lb).isometric == oracle(la, moved).isometric


# ---------------------------------------------------------------------------
# discrimination probes


def test_constant_embedding_never_discriminates():
    pair = generate_pair("tree_not_triangular", 1)
    assert not discrimination_test(lambda g: np.zeros(4), pair, 0.0)


@pytest.mark.parametrize("seed", range(6))
def test_distance_multiset_embedding_blind_on_tree_pairs(seed):
    pair = generate_pair("tree_not_triangular", seed)
    a = distance_multiset_embedding(pair[0])
    b = distance_multiset_embedding(pair[1])
    assert np.linalg.norm(a - b) < 1e-8
    assert not discrimination_test(distance_multiset_embedding, pair, 1e-8)


def test_distance_multiset_embedding_separates_unrelated_graphs():
    ga, _ = generate_pair("tree_not_triangular", 0)
    gb, _ = generate_pair("triangular_not_subgraph", 0)
    assert discrimination_test(distance_multiset_embedding, (ga, gb), 1e-6)


# ---------------------------------------------------------------------------
# polarization identities


def test_fa_identity_hand_examples():
    assert fa_identity_check((1, 0, 0), (0, 1, 0)) == (0.0, 0.0)
    lhs, rhs = fa_identity_check((1, 0, 0), (1, 0, 0))
    assert lhs == rhs == 1.0


@settings(max_examples=100, deadline=None)
@given(st.tuples(finite, finite, finite), st.tuples(finite, finite, finite))
def test_fa_identity_property(hb, hc):
    lhs, rhs = fa_identity_check(hb, hc)
    assert abs(lhs - rhs) < 1e-12


def random_frame(seed: int) -> Frame:
    rng = np.random.default_rng(seed)
    while True:
        a, b = rng.normal(size=3), rng.normal(size=3)
        if np.linalg.norm(np.cross(a, b)) > 1e-3:
            return gram_schmidt(Vec3(*a), Vec3(*b))


def test_ft_from_messages_identity_frames():
    f = random_frame(0)
    assert np.allclose(np.asarray(ft_from_messages(f, f)), np.eye(3),
                       atol=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_ft_from_messages_matches_direct_transition(seed):
    fi, fj = random_frame(seed), random_frame(seed + 100)
    direct = np.asarray(frame_transition(fi, fj))
    rebuilt = np.asarray(ft_from_messages(fi, fj))
    assert np.allclose(rebuilt, direct, atol=1e-12)


def test_ft_from_messages_invariant_under_common_rotation():
    fi, fj = random_frame(1), random_frame(2)
    rot = rotmat(5)

    def spin(f: Frame) -> Frame:
        return Frame(*(Vec3(*(rot @ np.asarray(e))) for e in f))

    before = np.asarray(ft_from_messages(fi, fj))
    after = np.asarray(ft_from_messages(spin(fi), spin(fj)))
    assert np.allclose(before, after, atol=1e-12)
