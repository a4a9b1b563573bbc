"""Frame construction, scalarization round-trips, and torsion oracles."""

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from leftnet.errors import DegenerateGeometry
from leftnet.geometry import (
    Frame,
    Mat3,
    RigidMotion,
    Vec3,
    apply_motion,
    compose_motions,
    edge_frame,
    frame_transition,
    gram_schmidt,
    node_frame,
    random_rotation,
    scalarize,
    scalarize_rank2,
    tensorize,
    tensorize_rank2,
    torsion_from_transition,
)

coord = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
vec3s = st.builds(Vec3, coord, coord, coord)


def well_separated(*vs, margin=1e-3):
    ok = all(v.norm() > margin for v in vs)
    for a in range(len(vs)):
        for b in range(a + 1, len(vs)):
            ok = ok and (vs[a] - vs[b]).norm() > margin
            ok = ok and vs[a].cross(vs[b]).norm() > margin
    return ok


def vdiff(a: Vec3, b: Vec3) -> float:
    return (a - b).norm()


def rot_frame(R: Mat3, f: Frame) -> Frame:
    return Frame(R.apply(f.e1), R.apply(f.e2), R.apply(f.e3))


def assert_orthonormal_rh(f: Frame, tol=1e-12):
    for a in (f.e1, f.e2, f.e3):
        assert abs(a.norm() - 1.0) < tol
    assert abs(f.e1.dot(f.e2)) < tol
    assert abs(f.e1.dot(f.e3)) < tol
    assert abs(f.e2.dot(f.e3)) < tol
    assert vdiff(f.e1.cross(f.e2), f.e3) < tol


# ---------------------------------------------------------------------------
# frozen hand-computed values


def test_edge_frame_hand_example():
    f = edge_frame(Vec3(1, 0, 0), Vec3(0, 1, 0))
    s = 1.0 / math.sqrt(2.0)
    assert vdiff(f.e1, Vec3(s, -s, 0)) < 1e-15
    assert vdiff(f.e2, Vec3(0, 0, 1)) < 1e-15
    assert vdiff(f.e3, Vec3(-s, -s, 0)) < 1e-15


def test_node_frame_hand_example():
    f = node_frame(Vec3(1, 0, 0), [Vec3(0, 2, 0)])
    s = 1.0 / math.sqrt(5.0)
    assert vdiff(f.e1, Vec3(s, -2 * s, 0)) < 1e-15
    assert vdiff(f.e2, Vec3(0, 0, -1)) < 1e-15
    assert vdiff(f.e3, Vec3(2 * s, s, 0)) < 1e-15


def test_scalarize_identity_frame():
    f = Frame(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1))
    assert scalarize(Vec3(2.0, -3.0, 0.5), f) == (2.0, -3.0, 0.5)
    assert scalarize(Vec3(2.0, -3.0, 0.5), f, mode="E3") == (2.0, 3.0, 0.5)


def test_tensorize_identity_frame():
    f = Frame(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1))
    assert tensorize((2.0, -3.0, 0.5), f) == Vec3(2.0, -3.0, 0.5)


def test_frame_transition_of_equal_frames_is_identity():
    f = edge_frame(Vec3(1, 0.2, -0.3), Vec3(-0.5, 1.1, 0.7))
    R = frame_transition(f, f)
    I = Mat3.identity()
    for k in range(3):
        assert vdiff(R.row(k), I.row(k)) < 1e-14


# ---------------------------------------------------------------------------
# degeneracy is a hard error


def test_gram_schmidt_collinear_raises():
    with pytest.raises(DegenerateGeometry):
        gram_schmidt(Vec3(1, 1, 0), Vec3(-2, -2, 0))


def test_gram_schmidt_zero_first_raises():
    with pytest.raises(DegenerateGeometry):
        gram_schmidt(Vec3(0, 0, 0), Vec3(1, 0, 0))


def test_edge_frame_coincident_raises():
    with pytest.raises(DegenerateGeometry):
        edge_frame(Vec3(1, 2, 3), Vec3(1, 2, 3))


def test_edge_frame_collinear_with_origin_raises():
    # antipodal pair through the centroid: cross product vanishes
    with pytest.raises(DegenerateGeometry):
        edge_frame(Vec3(1, 1, 1), Vec3(-2, -2, -2))


def test_node_frame_no_neighbors_raises():
    with pytest.raises(DegenerateGeometry):
        node_frame(Vec3(1, 0, 0), [])


def test_node_frame_at_neighbor_mean_raises():
    with pytest.raises(DegenerateGeometry):
        node_frame(Vec3(1, 0, 0), [Vec3(0, 1, 0), Vec3(2, -1, 0)])


# ---------------------------------------------------------------------------
# property tests


@given(vec3s, vec3s)
def test_gram_schmidt_orthonormal_right_handed(a, b):
    assume(well_separated(a, b))
    assert_orthonormal_rh(gram_schmidt(a, b))


@given(vec3s, vec3s)
def test_edge_frame_orthonormal_right_handed(xi, xj):
    assume(well_separated(xi, xj))
    assert_orthonormal_rh(edge_frame(xi, xj))


@settings(max_examples=200)
@given(vec3s, vec3s, st.integers(0, 10_000))
def test_scalarize_tensorize_round_trip(xi, xj, seed):
    assume(well_separated(xi, xj))
    f = edge_frame(xi, xj)
    rng = __import__("random").Random(seed)
    v = Vec3(*(rng.uniform(-5, 5) for _ in range(3)))
    assert vdiff(tensorize(scalarize(v, f), f), v) < 1e-12


@settings(max_examples=200)
@given(vec3s, vec3s, st.integers(0, 10_000))
def test_tensorize_scalarize_round_trip(xi, xj, seed):
    assume(well_separated(xi, xj))
    f = edge_frame(xi, xj)
    rng = __import__("random").Random(seed)
    t = tuple(rng.uniform(-5, 5) for _ in range(3))
    back = scalarize(tensorize(t, f), f)
    assert max(abs(a - b) for a, b in zip(back, t)) < 1e-12


@settings(max_examples=100)
@given(vec3s, vec3s, st.integers(0, 10_000))
def test_rank2_round_trip(xi, xj, seed):
    assume(well_separated(xi, xj))
    f = edge_frame(xi, xj)
    rng = __import__("random").Random(seed)
    T = Mat3.from_rows([[rng.uniform(-5, 5) for _ in range(3)] for _ in range(3)])
    back = tensorize_rank2(scalarize_rank2(T, f), f)
    for k in range(3):
        assert vdiff(back.row(k), T.row(k)) < 1e-11
    C = scalarize_rank2(T, f)
    C_back = scalarize_rank2(tensorize_rank2(C, f), f)
    for k in range(3):
        assert vdiff(C_back.row(k), C.row(k)) < 1e-11


@settings(max_examples=100)
@given(vec3s, vec3s, vec3s, st.integers(0, 10_000))
def test_edge_frame_rotation_equivariance(xi, xj, v, seed):
    assume(well_separated(xi, xj))
    g = random_rotation(seed)
    R = g.rotation
    f = edge_frame(xi, xj)
    f_rot = edge_frame(R.apply(xi), R.apply(xj))
    for a, b in zip(f_rot, rot_frame(R, f)):
        assert vdiff(a, b) < 1e-12
    # invariance of the scalarized coordinates
    s0 = scalarize(v, f)
    s1 = scalarize(R.apply(v), f_rot)
    assert max(abs(a - b) for a, b in zip(s0, s1)) < 1e-10


@settings(max_examples=100)
@given(vec3s, vec3s, vec3s, vec3s, st.integers(0, 10_000))
def test_frame_transition_rotation_invariant(a, b, c, d, seed):
    assume(well_separated(a, b) and well_separated(c, d))
    fi, fj = edge_frame(a, b), edge_frame(c, d)
    R = random_rotation(seed).rotation
    T0 = frame_transition(fi, fj)
    T1 = frame_transition(rot_frame(R, fi), rot_frame(R, fj))
    for k in range(3):
        assert vdiff(T0.row(k), T1.row(k)) < 1e-10


@settings(max_examples=100)
@given(vec3s, vec3s, vec3s, vec3s)
def test_frame_transition_is_special_orthogonal(a, b, c, d):
    assume(well_separated(a, b) and well_separated(c, d))
    T = frame_transition(edge_frame(a, b), edge_frame(c, d))
    TTt = T.matmul(T.transpose())
    I = Mat3.identity()
    for k in range(3):
        assert vdiff(TTt.row(k), I.row(k)) < 1e-12
    assert abs(T.det() - 1.0) < 1e-12


@settings(max_examples=100)
@given(vec3s, vec3s, vec3s, vec3s)
def test_frame_transition_maps_frame_j_to_frame_i(a, b, c, d):
    assume(well_separated(a, b) and well_separated(c, d))
    fi, fj = edge_frame(a, b), edge_frame(c, d)
    T = frame_transition(fi, fj)
    for k, ek in enumerate(fi):
        rebuilt = tensorize(T.row(k), fj)
        assert vdiff(rebuilt, ek) < 1e-12


def reflect_z(v: Vec3) -> Vec3:
    return Vec3(v.x, v.y, -v.z)


@settings(max_examples=100)
@given(vec3s, vec3s, vec3s)
def test_reflection_flips_only_pseudo_component(xi, xj, v):
    assume(well_separated(xi, xj))
    t = scalarize(v, edge_frame(xi, xj))
    tr = scalarize(reflect_z(v), edge_frame(reflect_z(xi), reflect_z(xj)))
    assert abs(t[0] - tr[0]) < 1e-12
    assert abs(t[1] + tr[1]) < 1e-12
    assert abs(t[2] - tr[2]) < 1e-12
    # E3 mode is fully invariant
    e0 = scalarize(v, edge_frame(xi, xj), mode="E3")
    e1 = scalarize(reflect_z(v), edge_frame(reflect_z(xi), reflect_z(xj)), mode="E3")
    assert max(abs(a - b) for a, b in zip(e0, e1)) < 1e-12


# ---------------------------------------------------------------------------
# torsion against an independent dihedral oracle


def plane_dihedral_cos(pk, pi, pj, pl):
    """Cosine of the dihedral along i-j with both plane normals built as
    (outer bond) x (central bond); anti-periplanar chains give 0 angle."""
    b1, b2, b3 = pi - pk, pj - pi, pl - pj
    m1 = b1.cross(b2)
    m2 = b3.cross(b2)
    return m1.dot(m2) / (m1.norm() * m2.norm())


def iupac_dihedral(pk, pi, pj, pl):
    """Signed torsion angle with the usual chemistry convention (trans = pi)."""
    b1, b2, b3 = pi - pk, pj - pi, pl - pj
    n1, n2 = b1.cross(b2), b2.cross(b3)
    m = n1.cross(b2.normalized())
    return math.atan2(m.dot(n2), n1.dot(n2))


def chain_frames(pk, pi, pj, pl):
    fi = gram_schmidt(pi - pj, pi - pk)
    fj = gram_schmidt(pj - pi, pj - pl)
    return fi, fj


def test_torsion_trans_chain_is_plus_one():
    pk, pi, pj, pl = Vec3(0, 1, 0), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, -1, 0)
    fi, fj = chain_frames(pk, pi, pj, pl)
    tau = torsion_from_transition(frame_transition(fi, fj))
    assert abs(tau - 1.0) < 1e-14
    assert abs(plane_dihedral_cos(pk, pi, pj, pl) - 1.0) < 1e-14
    assert abs(iupac_dihedral(pk, pi, pj, pl) - math.pi) < 1e-12


def test_torsion_cis_chain_is_minus_one():
    pk, pi, pj, pl = Vec3(0, 1, 0), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)
    fi, fj = chain_frames(pk, pi, pj, pl)
    tau = torsion_from_transition(frame_transition(fi, fj))
    assert abs(tau + 1.0) < 1e-14
    assert abs(iupac_dihedral(pk, pi, pj, pl)) < 1e-12


@settings(max_examples=200)
@given(vec3s, vec3s, vec3s, vec3s)
def test_torsion_matches_dihedral_oracle(pk, pi, pj, pl):
    assume(well_separated(pi - pk, pj - pi, pl - pj))
    fi, fj = chain_frames(pk, pi, pj, pl)
    tau = torsion_from_transition(frame_transition(fi, fj))
    assert abs(tau - plane_dihedral_cos(pk, pi, pj, pl)) < 1e-12
    assert abs(tau + math.cos(iupac_dihedral(pk, pi, pj, pl))) < 1e-9


# ---------------------------------------------------------------------------
# rigid motions


def test_random_rotation_deterministic():
    a, b = random_rotation(42), random_rotation(42)
    for k in range(3):
        assert a.rotation.row(k) == b.rotation.row(k)
    assert random_rotation(43).rotation.row(0) != a.rotation.row(0)


@given(st.integers(0, 100_000))
def test_random_rotation_is_proper_orthogonal(seed):
    R = random_rotation(seed).rotation
    RRt = R.matmul(R.transpose())
    I = Mat3.identity()
    for k in range(3):
        assert vdiff(RRt.row(k), I.row(k)) < 1e-12
    assert abs(R.det() - 1.0) < 1e-12


def test_random_rotation_mean_near_zero():
    # Haar-uniform rotations average any fixed vector to ~0
    v = Vec3(1.0, 0.0, 0.0)
    n = 4000
    acc = Vec3(0.0, 0.0, 0.0)
    for seed in range(n):
        acc = acc + random_rotation(seed).rotation.apply(v)
    assert (acc * (1.0 / n)).norm() < 0.05


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.integers(0, 10_000), vec3s, vec3s, vec3s)
def test_compose_motions_matches_sequential_application(s1, s2, t1, t2, p):
    g1 = RigidMotion(random_rotation(s1).rotation, t1, False)
    g2 = RigidMotion(random_rotation(s2).rotation, t2, False)
    (lhs,) = apply_motion(compose_motions(g1, g2), [p])
    (rhs,) = apply_motion(g1, apply_motion(g2, [p]))
    assert vdiff(lhs, rhs) < 1e-9


def test_compose_tracks_improper_parity():
    g = RigidMotion(Mat3.identity(), Vec3(0, 0, 0), True)
    assert compose_motions(g, g).improper is False
    assert compose_motions(g, RigidMotion(Mat3.identity(), Vec3(0, 0, 0), False)).improper is True
