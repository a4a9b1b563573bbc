"""Reference oracles for nested notions of local geometric equality.

Two one-hop neighborhoods can look "the same" at three strengths:

* tree level — matching multisets of (center distance, feature) pairs, i.e.
  each center edge can be aligned by its own rigid motion;
* triangular level — one bijection of neighbors under which every center
  edge's mutual substructure is congruent to its partner;
* subgraph level — a single proper rigid motion aligning the whole
  neighborhood.

Everything here is a brute-force reference, not production code: bijections
are enumerated outright (sizes are capped at 8 nodes), alignment is plain
Kabsch, and the counterexample generators re-check their output with the
oracles before returning it.  The module also hosts the polarization
identities that let plain message norms reconstruct a frame transition.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import GenerationFailed, TooLarge
from .geometry import Frame, Mat3, RigidMotion, Vec3, random_rotation
from .graphs import GeometricGraph

ALIGN_TOL = 1e-6  # RMSD below this counts as "the same shape"
MATCH_CAP = 8     # factorial bijection search bound


def _fkey(row) -> tuple:
    """Feature vector as a hashable equality key (1e-6 rounding)."""
    return tuple(np.round(np.atleast_1d(np.asarray(row, dtype=float)), 6))


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True, eq=False)
class LocalSubgraph:
    """One-hop neighborhood of ``center``: an attributed, edged point set.

    ``nodes`` keeps original graph ids (center first); ``edges`` is the
    undirected induced edge set on those ids.
    """

    center: int
    nodes: tuple[int, ...]
    positions: np.ndarray
    features: np.ndarray
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.center not in self.nodes:
            raise ValueError(f"center {self.center} not among nodes {self.nodes}")
        adj = self.adjacency()
        stray = [n for n in self.nodes
                 if n != self.center and self.center not in adj[n]]
        if stray:
            raise ValueError(f"nodes {stray} are not adjacent to the center")

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {n: set() for n in self.nodes}
        for p, q in self.edges:
            adj[p].add(q)
            adj[q].add(p)
        return adj

    @property
    def neighbors(self) -> tuple[int, ...]:
        return tuple(n for n in self.nodes if n != self.center)

    def index(self, node: int) -> int:
        return self.nodes.index(node)

    def pos(self, node: int) -> np.ndarray:
        return self.positions[self.index(node)]

    def feat(self, node: int):
        return self.features[self.index(node)]


def local_subgraph(graph: GeometricGraph, center: int) -> LocalSubgraph:
    """Cut the one-hop neighborhood of ``center`` out of ``graph``."""
    nodes = (center, *sorted(graph.neighbors(center)))
    node_set = set(nodes)
    und = set()
    for i, j in map(tuple, graph.edges):
        if i in node_set and j in node_set and i != j:
            und.add((min(i, j), max(i, j)))
    idx = np.asarray(nodes, dtype=np.intp)
    return LocalSubgraph(
        center=center,
        nodes=nodes,
        positions=graph.positions[idx].copy(),
        features=graph.node_features[idx].copy(),
        edges=frozenset(und),
    )


@dataclass(frozen=True)
class IsometryWitness:
    """Node bijection plus the aligning motions that certify a match.

    ``motions`` is keyed by the matched neighbor for the per-edge levels;
    the subgraph-level oracle stores its single global motion under the
    center id.
    """

    bijection: dict[int, int]
    motions: dict[int, RigidMotion]


@dataclass(frozen=True)
class IsometryReport:
    level: str  # "tree" | "triangular" | "subgraph"
    isometric: bool
    witness: IsometryWitness | None
    residual: float

    def __post_init__(self):
        if self.isometric and not self.residual <= ALIGN_TOL:
            raise ValueError(
                f"isometric report with residual {self.residual} > {ALIGN_TOL}")


# ---------------------------------------------------------------------------
# alignment


def kabsch_se3(X, Y) -> tuple[Mat3, Vec3, float]:
    """Least-squares proper rigid alignment ``R x + t ~ y``.

    Returns the rotation, the translation, and the RMSD of the aligned
    sets.  The reflection ambiguity of the SVD is resolved by flipping the
    smallest singular direction, so ``det(R) = +1`` always.
    """
    xs = np.asarray([tuple(p) for p in X], dtype=float)
    ys = np.asarray([tuple(p) for p in Y], dtype=float)
    if xs.ndim != 2 or xs.shape[1] != 3 or xs.shape != ys.shape or len(xs) == 0:
        raise ValueError("kabsch_se3 expects two equal-length 3-D point lists")
    xm, ym = xs.mean(axis=0), ys.mean(axis=0)
    h = (xs - xm).T @ (ys - ym)
    u, _, vt = np.linalg.svd(h)
    d = float(np.sign(np.linalg.det(vt.T @ u.T))) or 1.0
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = ym - r @ xm
    delta = xs @ r.T + t - ys
    rmsd = float(np.sqrt(np.mean(np.sum(delta * delta, axis=1))))
    return Mat3.from_rows(r), Vec3(*t), rmsd


def _motion(rot: Mat3, t: Vec3) -> RigidMotion:
    return RigidMotion(rotation=rot, translation=t, improper=False)


# ---------------------------------------------------------------------------
# tree level


def _length_groups(sub: LocalSubgraph) -> dict[tuple, list[tuple[float, int]]]:
    center = sub.pos(sub.center)
    groups: dict[tuple, list[tuple[float, int]]] = {}
    for u in sub.neighbors:
        d = float(np.linalg.norm(sub.pos(u) - center))
        groups.setdefault(_fkey(sub.feat(u)), []).append((d, u))
    for lst in groups.values():
        lst.sort()
    return groups


def tree_isometric(a: LocalSubgraph, b: LocalSubgraph) -> IsometryReport:
    """Do the neighborhoods match edge-by-edge, each with its own motion?

    Independent per-edge motions reduce exactly to equality of the
    (center distance, neighbor feature) multisets, so that is what gets
    compared; the reported residual is the worst matched length gap.
    """
    no = IsometryReport("tree", False, None, math.inf)
    if _fkey(a.feat(a.center)) != _fkey(b.feat(b.center)):
        return no
    ga, gb = _length_groups(a), _length_groups(b)
    if set(ga) != set(gb):
        return no
    if any(len(ga[k]) != len(gb[k]) for k in ga):
        return no
    bijection: dict[int, int] = {}
    worst = 0.0
    for key, pairs_a in ga.items():
        for (da, u), (db, v) in zip(pairs_a, gb[key]):
            worst = max(worst, abs(da - db))
            bijection[u] = v
    if worst > ALIGN_TOL:
        return IsometryReport("tree", False, None, worst)
    motions = {}
    for u, v in bijection.items():
        rot, t, _ = kabsch_se3([a.pos(a.center), a.pos(u)],
                               [b.pos(b.center), b.pos(v)])
        motions[u] = _motion(rot, t)
    bijection[a.center] = b.center
    return IsometryReport("tree", True, IsometryWitness(bijection, motions),
                          worst)


# ---------------------------------------------------------------------------
# triangular level


class _SubPoints:
    """Substructure of one center edge, prepared for congruence search."""

    __slots__ = ("points", "fkeys", "edges")

    def __init__(self, sub: LocalSubgraph, u: int):
        adj = sub.adjacency()
        common = sorted((adj[sub.center] & adj[u]) - {sub.center, u})
        order = [sub.center, u, *common]
        if len(order) > MATCH_CAP:
            raise TooLarge(
                f"substructure of edge ({sub.center}, {u}) has "
                f"{len(order)} nodes; the matching cap is {MATCH_CAP}")
        lookup = {n: k for k, n in enumerate(order)}
        self.points = np.asarray([sub.pos(n) for n in order], dtype=float)
        self.fkeys = [_fkey(sub.feat(n)) for n in order]
        self.edges = frozenset(
            (min(lookup[p], lookup[q]), max(lookup[p], lookup[q]))
            for p, q in sub.edges if p in lookup and q in lookup)


def _congruence(sa: _SubPoints, sb: _SubPoints
                ) -> tuple[float, RigidMotion | None]:
    """Best proper-alignment RMSD with roles fixed: center→center, u→v."""
    m = len(sa.points)
    if len(sb.points) != m or sa.fkeys[:2] != sb.fkeys[:2]:
        return math.inf, None
    best, best_motion = math.inf, None
    for perm in itertools.permutations(range(2, m)):
        mapping = (0, 1, *perm)
        if any(sa.fkeys[k] != sb.fkeys[mapping[k]] for k in range(2, m)):
            continue
        if frozenset((min(mapping[p], mapping[q]), max(mapping[p], mapping[q]))
                     for p, q in sa.edges) != sb.edges:
            continue
        rot, t, rmsd = kabsch_se3(sa.points, sb.points[list(mapping)])
        if rmsd < best:
            best, best_motion = rmsd, _motion(rot, t)
    return best, best_motion


def triangular_isometric(a: LocalSubgraph, b: LocalSubgraph) -> IsometryReport:
    """One neighbor bijection, every center edge's substructure congruent.

    The congruence keeps the roles of the edge endpoints fixed (center to
    center, matched neighbor to matched neighbor) and brute-forces the
    common-neighbor matching; the outer neighbor bijection is found by
    min-max backtracking over per-edge residuals.
    """
    no = IsometryReport("triangular", False, None, math.inf)
    na, nb = a.neighbors, b.neighbors
    if _fkey(a.feat(a.center)) != _fkey(b.feat(b.center)) or len(na) != len(nb):
        return no
    if len(na) > MATCH_CAP:
        raise TooLarge(f"{len(na)} neighbors exceeds the {MATCH_CAP}-node "
                       "bijection cap")
    subs_a = {u: _SubPoints(a, u) for u in na}
    subs_b = {v: _SubPoints(b, v) for v in nb}
    cache: dict[tuple[int, int], tuple[float, RigidMotion | None]] = {}

    def edge_fit(u: int, v: int) -> tuple[float, RigidMotion | None]:
        if (u, v) not in cache:
            cache[u, v] = _congruence(subs_a[u], subs_b[v])
        return cache[u, v]

    best: list = [math.inf, None]
    order = sorted(na)

    def backtrack(k: int, used: set[int], worst: float, bij: dict[int, int]):
        if worst >= best[0]:
            return
        if k == len(order):
            best[0], best[1] = worst, dict(bij)
            return
        u = order[k]
        for v in sorted(set(nb) - used):
            r, _ = edge_fit(u, v)
            if max(worst, r) >= best[0]:
                continue
            bij[u] = v
            backtrack(k + 1, used | {v}, max(worst, r), bij)
            del bij[u]

    backtrack(0, set(), 0.0, {})
    residual, bijection = best
    if bijection is None or residual > ALIGN_TOL:
        return IsometryReport("triangular", False, None, residual)
    motions = {u: edge_fit(u, v)[1] for u, v in bijection.items()}
    bijection[a.center] = b.center
    return IsometryReport("triangular", True,
                          IsometryWitness(bijection, motions), residual)


# ---------------------------------------------------------------------------
# subgraph level


def subgraph_isometric(a: LocalSubgraph, b: LocalSubgraph) -> IsometryReport:
    """One proper rigid motion aligning the whole neighborhoods.

    Searches adjacency- and feature-preserving bijections (center fixed to
    center) and reports the smallest full-set Kabsch RMSD found.
    """
    no = IsometryReport("subgraph", False, None, math.inf)
    if len(a.nodes) > MATCH_CAP or len(b.nodes) > MATCH_CAP:
        raise TooLarge(f"{max(len(a.nodes), len(b.nodes))} nodes exceeds the "
                       f"{MATCH_CAP}-node bijection cap")
    if len(a.nodes) != len(b.nodes):
        return no
    if _fkey(a.feat(a.center)) != _fkey(b.feat(b.center)):
        return no
    adj_a, adj_b = a.adjacency(), b.adjacency()
    order = [a.center, *sorted(a.neighbors)]
    candidates = {
        u: [v for v in b.neighbors
            if _fkey(b.feat(v)) == _fkey(a.feat(u))
            and len(adj_b[v]) == len(adj_a[u])]
        for u in a.neighbors
    }
    best: list = [math.inf, None, None]

    def backtrack(k: int, bij: dict[int, int]):
        if k == len(order):
            idx_a = [a.index(n) for n in order]
            idx_b = [b.index(bij[n]) for n in order]
            rot, t, rmsd = kabsch_se3(a.positions[idx_a], b.positions[idx_b])
            if rmsd < best[0]:
                best[0], best[1], best[2] = rmsd, dict(bij), _motion(rot, t)
            return
        u = order[k]
        for v in candidates[u]:
            if v in bij.values():
                continue
            ok = all(((min(u, w), max(u, w)) in a.edges)
                     == ((min(v, x), max(v, x)) in b.edges)
                     for w, x in bij.items())
            if ok:
                bij[u] = v
                backtrack(k + 1, bij)
                del bij[u]

    backtrack(1, {a.center: b.center})
    rmsd, bijection, motion = best
    if bijection is None or rmsd > ALIGN_TOL:
        return IsometryReport("subgraph", False, None, rmsd)
    return IsometryReport("subgraph", True,
                          IsometryWitness(bijection, {a.center: motion}), rmsd)


# ---------------------------------------------------------------------------
# counterexample generators


def _both_directions(und_edges) -> np.ndarray:
    pairs = sorted({(min(i, j), max(i, j)) for i, j in und_edges})
    both = np.asarray([*pairs, *[(j, i) for i, j in pairs]], dtype=np.intp)
    return both[np.lexsort((both[:, 1], both[:, 0]))]


def _graph_from(points: np.ndarray, zs, und_edges) -> GeometricGraph:
    points = np.asarray(points, dtype=float)
    lengths = [float(np.linalg.norm(points[i] - points[j]))
               for i, j in und_edges]
    return GeometricGraph(points, np.asarray(zs, dtype=np.intp), None,
                          _both_directions(und_edges), max(lengths) + 0.5)


def _moved(rng: random.Random, points: np.ndarray) -> np.ndarray:
    rot = np.asarray(random_rotation(rng.randrange(2 ** 31)).rotation,
                     dtype=float)
    shift = np.asarray([rng.uniform(-3.0, 3.0) for _ in range(3)])
    return points @ rot.T + shift


def _tree_not_triangular_attempt(rng: random.Random):
    lengths = sorted(rng.uniform(1.2, 2.2) for _ in range(3))
    lp, lq, lm = lengths
    if lq - lp < 0.12 or lm - lq < 0.12:
        return None
    alpha = rng.uniform(0.6, 2.4)
    beta = rng.uniform(0.6, 2.4)
    phi = rng.uniform(0.4, 1.2)
    delta = rng.uniform(0.5, 1.5) * rng.choice((-1.0, 1.0))

    def coords(phi_m: float) -> np.ndarray:
        # center 0, then p, q, m; m twists about the center-q axis (+x),
        # which preserves every *edge* length but moves the p-m distance
        return np.asarray([
            [0.0, 0.0, 0.0],
            [lp * math.cos(alpha), lp * math.sin(alpha), 0.0],
            [lq, 0.0, 0.0],
            [lm * math.cos(beta),
             lm * math.sin(beta) * math.cos(phi_m),
             lm * math.sin(beta) * math.sin(phi_m)],
        ])

    zs = (6, 1, 7, 8)
    edges = ((0, 1), (0, 2), (0, 3), (2, 1), (2, 3))
    return (_graph_from(coords(phi), zs, edges),
            _graph_from(_moved(rng, coords(phi + delta)), zs, edges))


def _triangular_not_subgraph_attempt(rng: random.Random):
    r1 = rng.uniform(1.2, 2.0)
    r2 = rng.uniform(1.2, 2.0)
    if abs(r1 - r2) < 0.15:
        return None
    gamma = rng.uniform(0.7, 1.8)
    theta = rng.uniform(0.9, 1.5)
    delta = rng.uniform(0.4, 0.9)
    axis = np.asarray([rng.gauss(0.0, 1.0) for _ in range(3)])
    if np.linalg.norm(axis) < 1e-3:
        return None
    axis /= np.linalg.norm(axis)
    triangle = np.asarray([
        [r1, 0.0, 0.0],
        [r2 * math.cos(gamma), r2 * math.sin(gamma), 0.0],
    ])

    def coords(angle: float) -> np.ndarray:
        # two congruent triangles sharing the center; the second is the
        # first swung by `angle` about a generic axis through the center
        swung = triangle @ Rotation.from_rotvec(angle * axis).as_matrix().T
        return np.vstack([np.zeros(3), triangle, swung])

    pts_a, pts_b = coords(theta), coords(theta + delta)
    for pts in (pts_a, pts_b):
        diffs = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diffs ** 2).sum(-1)) + np.eye(len(pts))
        if dist.min() < 0.3:
            return None
    zs = (6, 1, 1, 1, 1)
    edges = ((0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4))
    return (_graph_from(pts_a, zs, edges),
            _graph_from(_moved(rng, pts_b), zs, edges))


_PAIR_BUILDERS = {
    "tree_not_triangular": _tree_not_triangular_attempt,
    "triangular_not_subgraph": _triangular_not_subgraph_attempt,
}


def _pair_verified(kind: str, pair) -> bool:
    la, lb = (local_subgraph(g, 0) for g in pair)
    if kind == "tree_not_triangular":
        return (tree_isometric(la, lb).isometric
                and not triangular_isometric(la, lb).isometric)
    return (triangular_isometric(la, lb).isometric
            and not subgraph_isometric(la, lb).isometric)


def generate_pair(kind: str, seed: int
                  ) -> tuple[GeometricGraph, GeometricGraph]:
    """Two graphs that agree at one level and provably differ at the next.

    Node 0 is the probed center in both graphs.  Deterministic per
    (kind, seed), and every returned pair has been re-checked with the
    oracles (so callers may rely on the advertised classification).
    """
    try:
        builder = _PAIR_BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown pair kind {kind!r}; expected one of "
                         f"{sorted(_PAIR_BUILDERS)}") from None
    for attempt in range(100):
        rng = random.Random(f"{kind}:{seed}:{attempt}")
        pair = builder(rng)
        if pair is not None and _pair_verified(kind, pair):
            return pair
    raise GenerationFailed(f"no verified {kind} pair within 100 attempts "
                           f"for seed {seed}")


# ---------------------------------------------------------------------------
# discrimination probes


def discrimination_test(embed, pair, threshold: float) -> bool:
    """Does ``embed`` separate the pair by more than ``threshold``?"""
    ga, gb = pair
    diff = np.asarray(embed(ga), dtype=float) - np.asarray(embed(gb), dtype=float)
    return float(np.linalg.norm(diff)) > threshold


def distance_multiset_embedding(graph: GeometricGraph,
                                num_moments: int = 4) -> np.ndarray:
    """Permutation-invariant summary seeing only edge lengths and features.

    Power sums of the (length, feature-product, feature-sum) edge multiset
    plus node-feature sums — the strongest thing a distance-only encoder
    can report about a one-hop star, and provably blind to dihedral twists
    that preserve every edge length.
    """
    z = graph.atomic_numbers.astype(float)
    und = sorted({(min(i, j), max(i, j)) for i, j in map(tuple, graph.edges)})
    rows = sorted(
        (float(np.linalg.norm(graph.positions[i] - graph.positions[j])),
         z[i] * z[j], z[i] + z[j])
        for i, j in und)
    arr = np.asarray(rows, dtype=float).reshape(-1, 3)
    out = [z.sum(), float(np.sum(z * z)), float(len(und))]
    for k in range(1, num_moments + 1):
        dk = arr[:, 0] ** k
        out.extend([dk.sum(), float(dk @ arr[:, 1]), float(dk @ arr[:, 2])])
    return np.asarray(out)


# ---------------------------------------------------------------------------
# polarization identities


def fa_identity_check(h_b, h_c) -> tuple[float, float]:
    """Dot product two ways: directly, and from norms of sums.

    Returns (lhs, rhs) with lhs = h_b . h_c and
    rhs = (|h_b + h_c|^2 - |h_b|^2 - |h_c|^2) / 2 for equality assertions.
    """
    vb = np.asarray(tuple(h_b), dtype=float)
    vc = np.asarray(tuple(h_c), dtype=float)
    lhs = float(vb @ vc)
    s = vb + vc
    rhs = 0.5 * float(s @ s - vb @ vb - vc @ vc)
    return lhs, rhs


def ft_from_messages(f_i: Frame, f_j: Frame) -> Mat3:
    """Frame transition rebuilt from norms of summed frame vectors only.

    Entry (k, l) is (|e_k^i + e_l^j|^2 - |e_k^i|^2 - |e_l^j|^2) / 2, which
    equals e_k^i . e_l^j — so summation plus vector norms suffice to
    recover the full transition matrix.
    """
    rows = []
    for ek in f_i:
        rows.append(Vec3(*(fa_identity_check(ek, el)[1] for el in f_j)))
    return Mat3(*rows)


# ---------------------------------------------------------------------------
# randomized suite


def _random_neighborhood(rng: random.Random) -> GeometricGraph:
    k = rng.randint(2, 5)
    zs = [6] + [rng.choice((1, 6, 7, 8)) for _ in range(k)]
    pts = [np.zeros(3)]
    for _ in range(k):
        for _attempt in range(50):
            v = np.asarray([rng.gauss(0.0, 1.0) for _ in range(3)])
            n = np.linalg.norm(v)
            if n < 1e-3:
                continue
            cand = v / n * rng.uniform(1.0, 3.0)
            if all(np.linalg.norm(cand - p) > 0.4 for p in pts):
                pts.append(cand)
                break
        else:
            pts.append(np.asarray([3.0 + len(pts), 0.0, 0.0]))
    edges = {(0, i + 1) for i in range(k)}
    for i, j in itertools.combinations(range(1, k + 1), 2):
        if rng.random() < 0.4:
            edges.add((i, j))
    return _graph_from(np.asarray(pts), zs, sorted(edges))


def _suite_pair(rng: random.Random
                ) -> tuple[LocalSubgraph, LocalSubgraph]:
    kind = rng.randrange(7)
    if kind in (0, 1):  # exact copy under a rigid motion (all three levels)
        g = _random_neighborhood(rng)
        h = GeometricGraph(_moved(rng, g.positions), g.atomic_numbers.copy(),
                           g.node_features.copy(), g.edges.copy(), g.cutoff)
        return local_subgraph(g, 0), local_subgraph(h, 0)
    if kind == 2:  # mirror copy: tree holds, higher levels chirality-dependent
        g = _random_neighborhood(rng)
        mirrored = g.positions * np.asarray([1.0, 1.0, -1.0])
        h = GeometricGraph(_moved(rng, mirrored), g.atomic_numbers.copy(),
                           g.node_features.copy(), g.edges.copy(), g.cutoff)
        return local_subgraph(g, 0), local_subgraph(h, 0)
    if kind == 3:  # one neighbor displaced
        g = _random_neighborhood(rng)
        moved = g.positions.copy()
        victim = rng.randrange(1, g.num_nodes)
        shift = np.asarray([rng.gauss(0.0, 1.0) for _ in range(3)])
        moved[victim] += 0.3 * shift / max(np.linalg.norm(shift), 1e-3)
        h = GeometricGraph(moved, g.atomic_numbers.copy(),
                           g.node_features.copy(), g.edges.copy(), g.cutoff)
        return local_subgraph(g, 0), local_subgraph(h, 0)
    if kind == 4:
        pair = generate_pair("tree_not_triangular", rng.randrange(2 ** 30))
        return local_subgraph(pair[0], 0), local_subgraph(pair[1], 0)
    if kind == 5:
        pair = generate_pair("triangular_not_subgraph", rng.randrange(2 ** 30))
        return local_subgraph(pair[0], 0), local_subgraph(pair[1], 0)
    a = _random_neighborhood(rng)  # independent draws
    b = _random_neighborhood(rng)
    return local_subgraph(a, 0), local_subgraph(b, 0)


def isometry_suite(n_pairs: int = 1000, n_seeds: int = 100,
                   seed: int = 0) -> dict:
    """Hierarchy-implication sweep plus generator classification sweep.

    Checks subgraph => triangular => tree on ``n_pairs`` randomized pairs
    and re-classifies ``generate_pair`` output for ``n_seeds`` seeds;
    returns counters suitable for a pass/fail report.
    """
    rng = random.Random(f"suite:{seed}")
    violations = 0
    outcomes: Counter = Counter()
    for _ in range(n_pairs):
        a, b = _suite_pair(rng)
        rt = tree_isometric(a, b)
        rtri = triangular_isometric(a, b)
        rsub = subgraph_isometric(a, b)
        if rsub.isometric and not rtri.isometric:
            violations += 1
        if rtri.isometric and not rt.isometric:
            violations += 1
        outcomes[(rt.isometric, rtri.isometric, rsub.isometric)] += 1
    classified = 0
    for s in range(n_seeds):
        ok = True
        for kind in _PAIR_BUILDERS:
            pair = generate_pair(kind, seed + s)
            ok = ok and _pair_verified(kind, pair)
        classified += bool(ok)
    return {
        "pairs": n_pairs,
        "violations": violations,
        "outcomes": {"".join("TF"[not x] for x in key): count
                     for key, count in sorted(outcomes.items())},
        "generator_seeds": n_seeds,
        "classified": classified,
    }
