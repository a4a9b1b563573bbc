"""Frames, scalarization/tensorization, and frame-transition algebra.

Everything here is exact double-precision Python with no third-party
dependencies; the rest of the package treats these functions as the reference
implementations and cross-checks its vectorized code against them.

Conventions:
  * a ``Frame`` is an ordered triple of orthonormal row vectors (e1, e2, e3)
    forming a right-handed basis (det = +1);
  * degeneracy threshold ``EPS_DEG = 1e-8`` on every norm precondition —
    degenerate input is a hard :class:`DegenerateGeometry`, never a silently
    patched axis;
  * ``Mat3`` entries are row-major: ``m[k][l]`` is row k, column l.
"""

from __future__ import annotations

import math
import random
from typing import Iterable, Literal, NamedTuple, Sequence

from .errors import DegenerateGeometry

EPS_DEG = 1e-8

Mode = Literal["SE3", "E3"]


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":  # type: ignore[override]
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def __mul__(self, s: float) -> "Vec3":  # type: ignore[override]
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n <= EPS_DEG:
            raise DegenerateGeometry(f"cannot normalize near-zero vector {self}")
        return Vec3(self.x / n, self.y / n, self.z / n)


ZERO = Vec3(0.0, 0.0, 0.0)


class Frame(NamedTuple):
    e1: Vec3
    e2: Vec3
    e3: Vec3


class Mat3(NamedTuple):
    """3x3 matrix as three row vectors; ``m[k][l]`` is row k, column l."""

    r0: Vec3
    r1: Vec3
    r2: Vec3

    @staticmethod
    def identity() -> "Mat3":
        return Mat3(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1))

    @staticmethod
    def from_rows(rows: Sequence[Sequence[float]]) -> "Mat3":
        return Mat3(*(Vec3(*map(float, r)) for r in rows))

    def row(self, k: int) -> Vec3:
        return (self.r0, self.r1, self.r2)[k]

    def col(self, l: int) -> Vec3:
        return Vec3(self.r0[l], self.r1[l], self.r2[l])

    def transpose(self) -> "Mat3":
        return Mat3(self.col(0), self.col(1), self.col(2))

    def apply(self, v: Vec3) -> Vec3:
        return Vec3(self.r0.dot(v), self.r1.dot(v), self.r2.dot(v))

    def matmul(self, other: "Mat3") -> "Mat3":
        ot = other.transpose()
        return Mat3(
            Vec3(self.r0.dot(ot.r0), self.r0.dot(ot.r1), self.r0.dot(ot.r2)),
            Vec3(self.r1.dot(ot.r0), self.r1.dot(ot.r1), self.r1.dot(ot.r2)),
            Vec3(self.r2.dot(ot.r0), self.r2.dot(ot.r1), self.r2.dot(ot.r2)),
        )

    def det(self) -> float:
        return self.r0.dot(self.r1.cross(self.r2))


class RigidMotion(NamedTuple):
    rotation: Mat3
    translation: Vec3
    improper: bool = False


def gram_schmidt(a: Vec3, b: Vec3) -> Frame:
    """Orthonormal right-handed frame from two non-collinear vectors.

    e1 = a/|a|; e2 = the b component orthogonal to e1, normalized;
    e3 = e1 x e2.
    """
    na = a.norm()
    if na <= EPS_DEG:
        raise DegenerateGeometry(f"first frame vector near zero: |a| = {na:g}")
    e1 = Vec3(a.x / na, a.y / na, a.z / na)
    b_perp = b - e1 * b.dot(e1)
    nb = b_perp.norm()
    if nb <= EPS_DEG:
        raise DegenerateGeometry(
            f"frame vectors near-collinear: residual norm {nb:g}"
        )
    e2 = Vec3(b_perp.x / nb, b_perp.y / nb, b_perp.z / nb)
    return Frame(e1, e2, e1.cross(e2))


def edge_frame(x_i: Vec3, x_j: Vec3) -> Frame:
    """Edge-attached frame from two centralized positions.

    e1 points from x_j to x_i; e2 is the normalized cross product x_i x x_j
    (degenerate when the two positions are collinear with the origin, which is
    why positions must be centralized first); e3 completes the triad.
    """
    d = x_i - x_j
    nd = d.norm()
    if nd <= EPS_DEG:
        raise DegenerateGeometry(f"edge endpoints coincide: |x_i - x_j| = {nd:g}")
    c = x_i.cross(x_j)
    nc = c.norm()
    if nc <= EPS_DEG:
        raise DegenerateGeometry(
            f"edge endpoints collinear with origin: |x_i x x_j| = {nc:g}"
        )
    e1 = Vec3(d.x / nd, d.y / nd, d.z / nd)
    e2 = Vec3(c.x / nc, c.y / nc, c.z / nc)
    return Frame(e1, e2, e1.cross(e2))


def node_frame(x_i: Vec3, neighbor_positions: Iterable[Vec3]) -> Frame:
    """Node-attached frame from a node and its neighborhood mean.

    With xbar the mean neighbor position: e1 = (x_i - xbar)/|.|,
    e2 = (xbar x x_i)/|.|, e3 = e1 x e2.
    """
    pts = list(neighbor_positions)
    if not pts:
        raise DegenerateGeometry("node_frame requires a nonempty neighbor list")
    inv = 1.0 / len(pts)
    xbar = Vec3(
        sum(p.x for p in pts) * inv,
        sum(p.y for p in pts) * inv,
        sum(p.z for p in pts) * inv,
    )
    d = x_i - xbar
    nd = d.norm()
    if nd <= EPS_DEG:
        raise DegenerateGeometry(f"node coincides with neighborhood mean: {nd:g}")
    c = xbar.cross(x_i)
    nc = c.norm()
    if nc <= EPS_DEG:
        raise DegenerateGeometry(
            f"neighborhood mean collinear with node through origin: {nc:g}"
        )
    e1 = Vec3(d.x / nd, d.y / nd, d.z / nd)
    e2 = Vec3(c.x / nc, c.y / nc, c.z / nc)
    return Frame(e1, e2, e1.cross(e2))


def scalarize(v: Vec3, f: Frame, mode: Mode = "SE3") -> tuple[float, float, float]:
    """Project an equivariant vector onto a frame, yielding invariant scalars.

    The second frame vector is a pseudo-vector (it flips under reflection), so
    E3 mode takes the absolute value of the second coordinate to stay invariant
    under improper motions.
    """
    t2 = v.dot(f.e2)
    if mode == "E3":
        t2 = abs(t2)
    return (v.dot(f.e1), t2, v.dot(f.e3))


def tensorize(t: Sequence[float], f: Frame) -> Vec3:
    """Rebuild an equivariant vector from frame coordinates: t1*e1+t2*e2+t3*e3."""
    return f.e1 * t[0] + f.e2 * t[1] + f.e3 * t[2]


def scalarize_rank2(T: Mat3, f: Frame) -> Mat3:
    """Coefficients of a rank-2 tensor in the frame basis: C[a][b] = e_a^T T e_b."""
    es = (f.e1, f.e2, f.e3)
    return Mat3(*(Vec3(*(ea.dot(T.apply(eb)) for eb in es)) for ea in es))


def tensorize_rank2(C: Mat3, f: Frame) -> Mat3:
    """Rebuild a rank-2 tensor from frame coefficients: sum C[a][b] e_a (x) e_b."""
    es = (f.e1, f.e2, f.e3)
    rows = []
    for r in range(3):
        row = [0.0, 0.0, 0.0]
        for a in range(3):
            for b in range(3):
                cab = C[a][b]
                if cab != 0.0:
                    ea_r = es[a][r]
                    row[0] += cab * ea_r * es[b][0]
                    row[1] += cab * ea_r * es[b][1]
                    row[2] += cab * ea_r * es[b][2]
        rows.append(Vec3(*row))
    return Mat3(*rows)


def frame_transition(f_i: Frame, f_j: Frame) -> Mat3:
    """Rotation relating two frames: R[k][l] = e_k^i . e_l^j.

    Stacking frame vectors as rows F, this satisfies F_i = R @ F_j; R is in
    SO(3) and every entry is invariant under a global rotation of both frames.
    """
    ei = (f_i.e1, f_i.e2, f_i.e3)
    ej = (f_j.e1, f_j.e2, f_j.e3)
    return Mat3(*(Vec3(*(ek.dot(el) for el in ej)) for ek in ei))


def torsion_from_transition(R: Mat3) -> float:
    """The (3,3) entry of a frame transition: cosine of the inter-plane dihedral."""
    return R[2][2]


def apply_motion(g: RigidMotion, points: Iterable[Vec3]) -> list[Vec3]:
    """Apply rotation-then-translation to each point."""
    return [g.rotation.apply(p) + g.translation for p in points]


def compose_motions(g1: RigidMotion, g2: RigidMotion) -> RigidMotion:
    """Composition g1 o g2, i.e. apply g2 first."""
    return RigidMotion(
        rotation=g1.rotation.matmul(g2.rotation),
        translation=g1.rotation.apply(g2.translation) + g1.translation,
        improper=g1.improper != g2.improper,
    )


def random_rotation(seed: int) -> RigidMotion:
    """Haar-uniform proper rotation (normalized-quaternion method), no translation."""
    rng = random.Random(seed)
    while True:
        q = [rng.gauss(0.0, 1.0) for _ in range(4)]
        n = math.sqrt(sum(c * c for c in q))
        if n > 1e-6:
            break
    w, x, y, z = (c / n for c in q)
    rot = Mat3.from_rows(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    return RigidMotion(rotation=rot, translation=ZERO, improper=False)
