"""Frame-based equivariant message passing over geometric graphs.

Two implementations of the same layer algebra live here on purpose:

* a batched tape implementation (`forward`, `energy_and_forces`) that runs
  disjoint unions of graphs as one index arithmetic pass and is fully
  differentiable w.r.t. positions and parameters;
* per-edge reference operations (`lse_weights`, `invariant_message`,
  `equivariant_message`, `aggregate`, `node_update`) written in plain
  numpy + the scalar geometry module, which the tests use as the oracle
  for the batched path.

Degenerate frames (collinear node neighborhoods, edges collinear with the
centroid) never raise inside `forward`: the affected element falls back to
its invariant-only path, its equivariant contributions are zeroed exactly,
and the event is counted on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from . import nn
from .autodiff import Tensor
from .errors import ConfigError, EmptyGraph
from .geometry import EPS_DEG, Frame, Vec3, scalarize as scalarize_vec
from .graphs import GeometricGraph, RbfConfig, Substructure, rbf_embed

MAX_ATOMIC_NUMBER = 118


@dataclass
class ModelConfig:
    num_layers: int = 4
    hidden_dim: int = 128
    vector_channels: int = 64
    use_tensor_channels: bool = False
    tensor_channels: int = 8
    mode: str = "SE3"
    cutoff: float = 5.0
    num_rbf: int = 32
    readout: str = "mean"
    use_lse: bool = True
    out_dim: int = 1

    def __post_init__(self):
        if self.num_layers < 1 or self.hidden_dim < 1 or self.num_rbf < 1:
            raise ConfigError("num_layers, hidden_dim and num_rbf must be >= 1")
        if self.vector_channels < 0 or self.tensor_channels < 0:
            raise ConfigError("channel counts must be nonnegative")
        if self.mode not in ("SE3", "E3"):
            raise ConfigError(f"mode must be SE3 or E3, got {self.mode!r}")
        if self.readout not in ("mean", "sum"):
            raise ConfigError(f"readout must be mean or sum, got {self.readout!r}")
        if self.cutoff <= 0:
            raise ConfigError("cutoff must be positive")
        if self.out_dim < 1:
            raise ConfigError("out_dim must be >= 1")


@dataclass
class FeatureState:
    """Per-node features: invariant scalars plus equivariant channels."""

    scalar: np.ndarray  # (n, d)
    vector_channels: np.ndarray  # (n, C, 3)
    tensor_channels: np.ndarray | None = None  # (n, C', 3, 3)


@dataclass
class ModelParams:
    config: ModelConfig
    rbf: RbfConfig
    params: nn.Params
    seed: int

    def names(self) -> list[str]:
        return list(self.params)

    def data(self) -> dict[str, np.ndarray]:
        return {k: v.data for k, v in self.params.items()}


@dataclass
class ForwardResult:
    node_state: FeatureState
    graph_scalar: np.ndarray  # (out_dim,) for a single graph
    graph_embedding: np.ndarray  # pooled hidden state, (d,)
    degenerate_edges: list[int] = field(default_factory=list)
    degenerate_nodes: list[int] = field(default_factory=list)


def _lse_member_hidden(d: int) -> int:
    return max(16, d // 4)


def init_params(config: ModelConfig, seed: int = 0) -> ModelParams:
    """Seeded parameter initialization; dict order is the checkpoint order."""
    rng = np.random.default_rng(seed)
    d, C, K = config.hidden_dim, config.vector_channels, config.num_rbf
    Ct = config.tensor_channels if config.use_tensor_channels else 0
    p: nn.Params = {}
    nn.init_embedding(p, rng, "embed", MAX_ATOMIC_NUMBER + 1, d)
    for l in range(config.num_layers):
        pre = f"L{l}"
        if config.use_lse:
            nn.init_mlp(p, rng, f"{pre}.lse.member", 3, _lse_member_hidden(d), d)
            nn.init_linear(p, rng, f"{pre}.lse.rproj", K, d)
            nn.init_linear(p, rng, f"{pre}.lse.combine", d + K, d)
        nn.init_linear(p, rng, f"{pre}.msg.trunk", 2 * d, d)
        nn.init_linear(p, rng, f"{pre}.msg.filter", K, d, bias=False)
        nn.init_linear(p, rng, f"{pre}.msg.hs", d, d)
        if C:
            if l == 0:
                nn.init_mlp(p, rng, f"{pre}.einit", 2 * d + K, d, 2 * C)
            else:
                nn.init_linear(p, rng, f"{pre}.msg.ga", d, C)
                nn.init_linear(p, rng, f"{pre}.msg.gb", d, C)
            nn.init_linear(p, rng, f"{pre}.msg.g2", d, C)
            nn.init_linear(p, rng, f"{pre}.msg.g3", d, 3 * C)
        if Ct:
            nn.init_linear(p, rng, f"{pre}.msg.gt", d, 9 * Ct)
        nn.init_linear(p, rng, f"{pre}.upd.l1", 2 * d + 3 * C + 9 * Ct, d)
        nn.init_linear(p, rng, f"{pre}.upd.l2", d, d)
        if C:
            nn.init_linear(p, rng, f"{pre}.upd.vhead", 3 * C + d, 3 * C)
        if Ct:
            nn.init_linear(p, rng, f"{pre}.upd.thead", 9 * Ct + d, 9 * Ct)
    nn.init_mlp(p, rng, "readout", d, d, config.out_dim)
    rbf = RbfConfig(num_basis=K, cutoff=config.cutoff)
    return ModelParams(config=config, rbf=rbf, params=p, seed=seed)


# ---------------------------------------------------------------------------
# batching


@dataclass
class _Batch:
    positions: np.ndarray  # (N, 3)
    atomic_numbers: np.ndarray  # (N,)
    graph_ids: np.ndarray  # (N,)
    node_counts: np.ndarray  # (G,)
    edges: np.ndarray  # (E, 2) global indices
    member_edge: np.ndarray  # (M,) edge index per substructure member
    member_node: np.ndarray  # (M,) global node index per member
    n_graphs: int

    @property
    def n_nodes(self) -> int:
        return len(self.positions)


def _graph_membership(g: GeometricGraph) -> tuple[np.ndarray, np.ndarray]:
    """Flat (edge index, node index) arrays listing substructure members."""
    cached = getattr(g, "_membership", None)
    if cached is not None:
        return cached
    nbrs: dict[int, set[int]] = {}
    for a, b in g.edges:
        nbrs.setdefault(int(a), set()).add(int(b))
    me, mn = [], []
    for e, (i, j) in enumerate(map(tuple, g.edges)):
        members = [i, j] + sorted(
            (nbrs.get(i, set()) & nbrs.get(j, set())) - {i, j})
        me.extend([e] * len(members))
        mn.extend(members)
    out = (np.asarray(me, dtype=np.intp), np.asarray(mn, dtype=np.intp))
    g._membership = out
    return out


def assemble(graphs: list[GeometricGraph]) -> _Batch:
    """Concatenate graphs into one disjoint union with global indices."""
    if not graphs:
        raise EmptyGraph("empty batch")
    pos, zs, gid, counts, edges, me, mn = [], [], [], [], [], [], []
    node_off = edge_off = 0
    for k, g in enumerate(graphs):
        n = g.num_nodes
        if n == 0:
            raise EmptyGraph(f"graph {k} in batch has no nodes")
        pos.append(g.positions)
        zs.append(g.atomic_numbers)
        gid.append(np.full(n, k, dtype=np.intp))
        counts.append(n)
        edges.append(g.edges + node_off)
        ge, gn = _graph_membership(g)
        me.append(ge + edge_off)
        mn.append(gn + node_off)
        node_off += n
        edge_off += len(g.edges)
    return _Batch(
        positions=np.concatenate(pos),
        atomic_numbers=np.concatenate(zs),
        graph_ids=np.concatenate(gid),
        node_counts=np.asarray(counts, dtype=np.float64),
        edges=np.concatenate(edges) if edges else np.zeros((0, 2), np.intp),
        member_edge=np.concatenate(me),
        member_node=np.concatenate(mn),
        n_graphs=len(graphs),
    )


# ---------------------------------------------------------------------------
# tape helpers (rows of shape (., 3))


def _rows_dot(a: Tensor, b: Tensor) -> Tensor:
    return ad.sum_(ad.mul(a, b), axis=1, keepdims=True)


def _rows_cross(a: Tensor, b: Tensor) -> Tensor:
    a0, a1, a2 = a[:, 0:1], a[:, 1:2], a[:, 2:3]
    b0, b1, b2 = b[:, 0:1], b[:, 1:2], b[:, 2:3]
    return ad.concatenate(
        [a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=1)


def _rows_scalarize(v: Tensor, e1: Tensor, e2: Tensor, e3: Tensor,
                    mode: str) -> Tensor:
    t2 = _rows_dot(v, e2)
    if mode == "E3":
        t2 = ad.abs_(t2)
    return ad.concatenate([_rows_dot(v, e1), t2, _rows_dot(v, e3)], axis=1)


def _safe_unit(v: Tensor, mask: np.ndarray) -> Tensor:
    """Normalize rows where mask is 1; exact zero rows elsewhere."""
    m = mask.reshape(-1, 1)
    n2 = _rows_dot(v, v)
    n2_safe = ad.add(ad.mul(n2, ad.constant(m)), ad.constant(1.0 - m))
    return ad.div(ad.mul(v, ad.constant(m)), ad.sqrt(n2_safe))


def _rbf_rows(d: Tensor, rbf: RbfConfig) -> Tensor:
    """Tape version of rbf_embed for a (., 1) column of distances."""
    inside = (d.data <= rbf.cutoff).astype(np.float64)
    centers = ad.constant(rbf.centers.reshape(1, -1))
    gauss = ad.exp(ad.mul(ad.constant(-rbf.gamma),
                          ad.pow_const(ad.sub(d, centers), 2.0)))
    env = ad.mul(ad.constant(0.5),
                 ad.add(ad.cos(ad.mul(ad.constant(np.pi / rbf.cutoff), d)), 1.0))
    return ad.mul(gauss, ad.mul(env, ad.constant(inside)))


def _segment_mean(x: Tensor, seg: np.ndarray, num: int,
                  counts: np.ndarray) -> Tensor:
    inv = (1.0 / np.maximum(counts, 1.0)).reshape(-1, 1)
    return ad.mul(ad.segment_sum(x, seg, num), ad.constant(inv))


# ---------------------------------------------------------------------------
# the batched forward


def _forward_core(batch: _Batch, mp: ModelParams, pos: Tensor,
                  trace: dict | None = None) -> dict:
    cfg, p, rbfc = mp.config, mp.params, mp.rbf
    d, C = cfg.hidden_dim, cfg.vector_channels
    Ct = cfg.tensor_channels if cfg.use_tensor_channels else 0
    N, E, G = batch.n_nodes, len(batch.edges), batch.n_graphs
    gid = batch.graph_ids
    ei, ej = batch.edges[:, 0], batch.edges[:, 1]

    # centralize per graph (differentiable: translation is modded out exactly)
    com = _segment_mean(pos, gid, G, batch.node_counts)
    pos_c = ad.sub(pos, ad.gather(com, gid))
    pcd = pos_c.data

    # edge geometry + degeneracy masks (masks are constants of the geometry)
    xi, xj = ad.gather(pos_c, ei), ad.gather(pos_c, ej)
    dvec = ad.sub(xi, xj)
    dist_ok = (np.linalg.norm(pcd[ei] - pcd[ej], axis=1) > EPS_DEG)
    cross_ok = (np.linalg.norm(np.cross(pcd[ei], pcd[ej]), axis=1) > EPS_DEG)
    mask_d = dist_ok.astype(np.float64).reshape(-1, 1)
    mask_e = (dist_ok & cross_ok).astype(np.float64).reshape(-1, 1)

    d2 = _rows_dot(dvec, dvec)
    d2_safe = ad.add(ad.mul(d2, ad.constant(mask_d)), ad.constant(1.0 - mask_d))
    dist = ad.mul(ad.sqrt(d2_safe), ad.constant(mask_d))
    fe1 = _safe_unit(dvec, mask_d[:, 0])
    fe2 = _safe_unit(_rows_cross(xi, xj), mask_e[:, 0])
    fe3 = _rows_cross(fe1, fe2)
    rbf_e = _rbf_rows(dist, rbfc)

    # node frames from the neighborhood mean
    deg = np.bincount(ei, minlength=N).astype(np.float64)
    xbar = ad.mul(ad.segment_sum(ad.gather(pos_c, ej), ei, N),
                  ad.constant((1.0 / np.maximum(deg, 1.0)).reshape(-1, 1)))
    ndvec = ad.sub(pos_c, xbar)
    ncross = _rows_cross(xbar, pos_c)
    node_ok = ((deg > 0)
               & (np.linalg.norm(ndvec.data, axis=1) > EPS_DEG)
               & (np.linalg.norm(ncross.data, axis=1) > EPS_DEG))
    mask_n = node_ok.astype(np.float64).reshape(-1, 1)
    ne1 = _safe_unit(ndvec, mask_n[:, 0])
    ne2 = _safe_unit(ncross, mask_n[:, 0])
    ne3 = _rows_cross(ne1, ne2)

    h = nn.embedding(p, "embed", batch.atomic_numbers)
    v = ad.zeros((N, C, 3)) if C else None
    T = ad.zeros((N, Ct, 3, 3)) if Ct else None

    for l in range(cfg.num_layers):
        pre = f"L{l}"

        # --- local substructure encoding -> gate A_ij ---------------------
        if cfg.use_lse:
            me, mn = batch.member_edge, batch.member_node
            xk = ad.gather(pos_c, mn)
            tk = _rows_scalarize(
                xk, ad.gather(fe1, me), ad.gather(fe2, me), ad.gather(fe3, me),
                cfg.mode)
            tk = ad.mul(tk, ad.constant(mask_e[me]))
            rm = ad.sqrt(ad.add(_rows_dot(xk, xk), ad.constant(1e-30)))
            wk = ad.mul(nn.linear(p, f"{pre}.lse.rproj", _rbf_rows(rm, rbfc)),
                        nn.mlp(p, f"{pre}.lse.member", tk))
            counts = np.bincount(me, minlength=E).astype(np.float64)
            a_mean = _segment_mean(wk, me, E, counts)
            A = nn.linear(p, f"{pre}.lse.combine",
                          ad.concatenate([a_mean, rbf_e], axis=1))
        else:
            A = ad.constant(np.ones((E, d)))

        # --- messages ------------------------------------------------------
        hi, hj = ad.gather(h, ei), ad.gather(h, ej)
        z = ad.mul(
            ad.silu(nn.linear(p, f"{pre}.msg.trunk",
                              ad.concatenate([hi, ad.mul(A, hj)], axis=1))),
            nn.linear(p, f"{pre}.msg.filter", rbf_e))
        m_s = ad.mul(nn.linear(p, f"{pre}.msg.hs", z), ad.constant(mask_d))

        # vector channels must stay proper vectors in E3 mode: the pseudo
        # frame vector e2 may be read (through the abs in scalarization)
        # but never used to build a channel, or reflections leak in
        e3_mode = cfg.mode == "E3"
        m_v = None
        if C:
            if l == 0:
                gates = nn.mlp(p, f"{pre}.einit",
                               ad.concatenate([hi, hj, rbf_e], axis=1))
                g_a = ad.reshape(gates[:, :C], (E, C, 1))
                g_b = ad.reshape(gates[:, C:], (E, C, 1))
                second = fe3 if e3_mode else fe2
                e_ij = ad.add(ad.mul(g_a, ad.reshape(fe1, (E, 1, 3))),
                              ad.mul(g_b, ad.reshape(second, (E, 1, 3))))
            else:
                ga = ad.reshape(nn.linear(p, f"{pre}.msg.ga", z), (E, C, 1))
                gb = ad.reshape(nn.linear(p, f"{pre}.msg.gb", z), (E, C, 1))
                e_ij = ad.add(ad.mul(ga, ad.gather(v, ei)),
                              ad.mul(gb, ad.gather(v, ej)))
            g2 = ad.reshape(nn.linear(p, f"{pre}.msg.g2", z), (E, C, 1))
            g3 = ad.reshape(nn.linear(p, f"{pre}.msg.g3", z), (E, C, 3))
            if e3_mode:
                g3 = ad.mul(g3, ad.constant(np.array([1.0, 0.0, 1.0])))
            m_v = ad.mul(g2, e_ij)
            for k, fek in enumerate((fe1, fe2, fe3)):
                m_v = ad.add(m_v, ad.mul(g3[:, :, k:k + 1],
                                         ad.reshape(fek, (E, 1, 3))))
            m_v = ad.mul(m_v, ad.constant(mask_e.reshape(E, 1, 1)))

        # same parity rule for rank-2 channels: an e_a (x) e_b dyad flips
        # under reflection iff exactly one index is the pseudo vector e2
        if e3_mode:
            proper_dyads = ad.constant(np.array(
                [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]))

        m_T = None
        if Ct:
            gt = ad.reshape(nn.linear(p, f"{pre}.msg.gt", z), (E, Ct, 3, 3))
            if e3_mode:
                gt = ad.mul(gt, proper_dyads)
            frame_rows = (fe1, fe2, fe3)
            m_T = ad.zeros((E, Ct, 3, 3))
            for a in range(3):
                for b in range(3):
                    outer = ad.mul(ad.reshape(frame_rows[a], (E, 1, 3, 1)),
                                   ad.reshape(frame_rows[b], (E, 1, 1, 3)))
                    m_T = ad.add(m_T, ad.mul(gt[:, :, a:a + 1, b:b + 1], outer))
            m_T = ad.mul(m_T, ad.constant(mask_e.reshape(E, 1, 1, 1)))

        # --- aggregate ------------------------------------------------------
        ms_i = ad.segment_sum(m_s, ei, N)
        if C:
            mv_i = ad.reshape(
                ad.segment_sum(ad.reshape(m_v, (E, 3 * C)), ei, N), (N, C, 3))
        if Ct:
            mT_i = ad.reshape(
                ad.segment_sum(ad.reshape(m_T, (E, 9 * Ct)), ei, N),
                (N, Ct, 3, 3))

        # --- node update: scalarize -> MLP -> tensorize ----------------------
        upd_in = [h, ms_i]
        if C:
            t_i = ad.reshape(_rows_scalarize(
                ad.reshape(mv_i, (N * C, 3)),
                _repeat_rows(ne1, C), _repeat_rows(ne2, C),
                _repeat_rows(ne3, C), cfg.mode), (N, C, 3))
            t_i = ad.mul(t_i, ad.constant(mask_n.reshape(N, 1, 1)))
            t_flat = ad.reshape(t_i, (N, 3 * C))
            upd_in.append(t_flat)
        if Ct:
            ct = _rank2_coeffs(mT_i, ne1, ne2, ne3, cfg.mode, N, Ct)
            ct = ad.mul(ct, ad.constant(mask_n.reshape(N, 1, 1, 1)))
            ct_flat = ad.reshape(ct, (N, 9 * Ct))
            upd_in.append(ct_flat)
        hidden = ad.silu(nn.linear(p, f"{pre}.upd.l1",
                                   ad.concatenate(upd_in, axis=1)))
        h = nn.linear(p, f"{pre}.upd.l2", hidden)
        if C:
            coef = ad.reshape(
                nn.linear(p, f"{pre}.upd.vhead",
                          ad.concatenate([t_flat, hidden], axis=1)), (N, C, 3))
            if e3_mode:
                coef = ad.mul(coef, ad.constant(np.array([1.0, 0.0, 1.0])))
            v = ad.zeros((N, C, 3))
            for k, nek in enumerate((ne1, ne2, ne3)):
                v = ad.add(v, ad.mul(coef[:, :, k:k + 1],
                                     ad.reshape(nek, (N, 1, 3))))
            v = ad.mul(v, ad.constant(mask_n.reshape(N, 1, 1)))
        if Ct:
            tcoef = ad.reshape(
                nn.linear(p, f"{pre}.upd.thead",
                          ad.concatenate([ct_flat, hidden], axis=1)),
                (N, Ct, 3, 3))
            if e3_mode:
                tcoef = ad.mul(tcoef, proper_dyads)
            frame_rows = (ne1, ne2, ne3)
            T = ad.zeros((N, Ct, 3, 3))
            for a in range(3):
                for b in range(3):
                    outer = ad.mul(ad.reshape(frame_rows[a], (N, 1, 3, 1)),
                                   ad.reshape(frame_rows[b], (N, 1, 1, 3)))
                    T = ad.add(T, ad.mul(tcoef[:, :, a:a + 1, b:b + 1], outer))
            T = ad.mul(T, ad.constant(mask_n.reshape(N, 1, 1, 1)))

        if trace is not None:
            trace[f"L{l}.A"] = A.data
            trace[f"L{l}.m_s"] = m_s.data
            if C:
                trace[f"L{l}.e_ij"] = e_ij.data
                trace[f"L{l}.m_v"] = m_v.data
            trace[f"L{l}.h"] = h.data

    pooled = ad.segment_sum(h, gid, G)
    if cfg.readout == "mean":
        pooled = ad.mul(pooled, ad.constant(
            (1.0 / batch.node_counts).reshape(-1, 1)))
    graph_scalar = nn.mlp(p, "readout", pooled)

    return {
        "h": h, "v": v, "T": T,
        "pooled": pooled, "graph_scalar": graph_scalar,
        "degenerate_edges": np.nonzero(mask_e[:, 0] == 0.0)[0],
        "degenerate_nodes": np.nonzero(mask_n[:, 0] == 0.0)[0],
    }


def _repeat_rows(e: Tensor, C: int) -> Tensor:
    """(N, 3) frame rows viewed per channel: (N*C, 3) with C repeats."""
    n = e.shape[0]
    rep = ad.broadcast_to(ad.reshape(e, (n, 1, 3)), (n, C, 3))
    return ad.reshape(rep, (n * C, 3))


def _rank2_coeffs(mT: Tensor, e1: Tensor, e2: Tensor, e3: Tensor,
                  mode: str, N: int, Ct: int) -> Tensor:
    """Frame coefficients c[a][b] = e_a . (T e_b) per channel, (N, Ct, 3, 3)."""
    rows = (e1, e2, e3)
    cols = []
    for a in range(3):
        ea = ad.reshape(rows[a], (N, 1, 3, 1))
        for b in range(3):
            eb = ad.reshape(rows[b], (N, 1, 1, 3))
            cab = ad.sum_(ad.mul(ad.mul(mT, eb), ea), axis=(2, 3))  # (N, Ct)
            if mode == "E3" and (a == 1) != (b == 1):
                cab = ad.abs_(cab)
            cols.append(ad.reshape(cab, (N, Ct, 1)))
    return ad.reshape(ad.concatenate(cols, axis=2), (N, Ct, 3, 3))


def forward_batch(graphs: list[GeometricGraph], mp: ModelParams,
                  pos: Tensor | None = None, trace: dict | None = None) -> dict:
    """Tape-level forward over a disjoint union; returns the raw tensor dict.

    Without an explicit position tensor this is inference: the tape records
    nothing and intermediates are freed as they go out of scope.
    """
    batch = assemble(graphs)
    if pos is None:
        with ad.no_grad():
            out = _forward_core(batch, mp, ad.constant(batch.positions),
                                trace=trace)
    else:
        out = _forward_core(batch, mp, pos, trace=trace)
    out["batch"] = batch
    out["pos"] = pos
    return out


def forward(graph: GeometricGraph, params: ModelParams,
            config: ModelConfig | None = None) -> tuple[FeatureState, np.ndarray]:
    """Run the interaction stack on one graph; numpy-facing."""
    if config is not None and config is not params.config:
        params = replace(params, config=config)
    out = forward_batch([graph], params)
    C = params.config.vector_channels
    state = FeatureState(
        scalar=out["h"].data,
        vector_channels=(out["v"].data if C else
                         np.zeros((graph.num_nodes, 0, 3))),
        tensor_channels=out["T"].data if out["T"] is not None else None,
    )
    return state, out["graph_scalar"].data[0]


def forward_result(graph: GeometricGraph, params: ModelParams) -> ForwardResult:
    out = forward_batch([graph], params)
    C = params.config.vector_channels
    state = FeatureState(
        scalar=out["h"].data,
        vector_channels=(out["v"].data if C else
                         np.zeros((graph.num_nodes, 0, 3))),
        tensor_channels=out["T"].data if out["T"] is not None else None,
    )
    return ForwardResult(
        node_state=state,
        graph_scalar=out["graph_scalar"].data[0],
        graph_embedding=out["pooled"].data[0],
        degenerate_edges=[int(k) for k in out["degenerate_edges"]],
        degenerate_nodes=[int(k) for k in out["degenerate_nodes"]],
    )


def energy_forces_tensors(graphs: list[GeometricGraph], mp: ModelParams
                          ) -> tuple[Tensor, Tensor, dict]:
    """Differentiable per-graph energies (G, out), forces (N, 3), features."""
    batch = assemble(graphs)
    pos = ad.leaf(batch.positions)
    out = _forward_core(batch, mp, pos)
    energy = out["graph_scalar"]
    (dE,) = ad.gradients(ad.sum_(energy), [pos])
    return energy, ad.neg(dE), out


def energy_and_forces(graph: GeometricGraph, params: ModelParams,
                      config: ModelConfig | None = None
                      ) -> tuple[float, np.ndarray]:
    """Predicted energy and forces = -dE/dpositions for one graph."""
    if config is not None and config is not params.config:
        params = replace(params, config=config)
    energy, forces, _ = energy_forces_tensors([graph], params)
    return float(energy.data[0, 0]), forces.data


# ---------------------------------------------------------------------------
# per-edge reference operations (the oracle half of the dual route)


def _np_silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def _np_linear(mp: ModelParams, name: str, x: np.ndarray) -> np.ndarray:
    w = mp.params[f"{name}.w"].data
    b = mp.params.get(f"{name}.b")
    y = x @ w
    return y if b is None else y + b.data


def _np_mlp(mp: ModelParams, name: str, x: np.ndarray) -> np.ndarray:
    return _np_linear(mp, f"{name}.l2",
                      _np_silu(_np_linear(mp, f"{name}.l1", x)))


def lse_weights(sub: Substructure, f_ij: Frame, params: ModelParams,
                mode: str | None = None, layer: int = 0) -> np.ndarray:
    """Structural gate A_ij from the mutual substructure around an edge.

    Member positions must come from a centralized parent graph (the norms
    below are distances to the molecular centroid).
    """
    mode = mode or params.config.mode
    pre = f"L{layer}"
    t = np.array([scalarize_vec(Vec3(*xk), f_ij, mode)
                  for xk in sub.member_positions])
    r = np.array([[rbf_embed(float(np.linalg.norm(xk)), params.rbf)]
                  for xk in sub.member_positions]).reshape(len(t), -1)
    w = _np_linear(params, f"{pre}.lse.rproj", r) * _np_mlp(
        params, f"{pre}.lse.member", t)
    d_ij = float(np.linalg.norm(
        sub.member_positions[0] - sub.member_positions[1]))
    # exact columnwise mean so member ordering cannot perturb the result
    w_mean = np.array([math.fsum(col) for col in w.T]) / len(w)
    combined = np.concatenate([w_mean, rbf_embed(d_ij, params.rbf)])
    return _np_linear(params, f"{pre}.lse.combine", combined[None, :])[0]


def invariant_message(h_i: np.ndarray, h_j: np.ndarray, A_ij: np.ndarray,
                      d_ij: float, params: ModelParams,
                      layer: int = 0) -> np.ndarray:
    """m_ij = head(silu(trunk([h_i, A ⊙ h_j])) ⊙ filter(rbf(d_ij)))."""
    pre = f"L{layer}"
    z = _message_hidden(h_i, h_j, A_ij, d_ij, params, pre)
    return _np_linear(params, f"{pre}.msg.hs", z[None, :])[0]


def _message_hidden(h_i, h_j, A_ij, d_ij, params, pre) -> np.ndarray:
    cat = np.concatenate([h_i, A_ij * h_j])[None, :]
    trunk = _np_silu(_np_linear(params, f"{pre}.msg.trunk", cat))
    filt = _np_linear(params, f"{pre}.msg.filter",
                      rbf_embed(float(d_ij), params.rbf)[None, :])
    return (trunk * filt)[0]


def initial_edge_vectors(h_i, h_j, d_ij: float, f_ij: Frame,
                         params: ModelParams) -> np.ndarray:
    """Layer-0 edge equivariant channels: two gated edge-frame vectors.

    SE3 mode gates e1/e2; E3 mode gates e1/e3 so channels stay proper
    vectors under reflection (e2 is a pseudo vector).
    """
    C = params.config.vector_channels
    cat = np.concatenate([h_i, h_j, rbf_embed(float(d_ij), params.rbf)])
    gates = _np_mlp(params, "L0.einit", cat[None, :])[0]
    e1 = np.array(f_ij.e1)
    second = np.array(f_ij.e3 if params.config.mode == "E3" else f_ij.e2)
    return gates[:C, None] * e1[None, :] + gates[C:, None] * second[None, :]


def equivariant_message(h_i, h_j, A_ij, d_ij: float, e_ij: np.ndarray,
                        f_ij: Frame, params: ModelParams, layer: int = 0
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Scalar message plus gated equivariant channels (C, 3)."""
    pre = f"L{layer}"
    C = params.config.vector_channels
    z = _message_hidden(h_i, h_j, A_ij, d_ij, params, pre)
    m_s = _np_linear(params, f"{pre}.msg.hs", z[None, :])[0]
    g2 = _np_linear(params, f"{pre}.msg.g2", z[None, :])[0]
    g3 = _np_linear(params, f"{pre}.msg.g3", z[None, :])[0].reshape(C, 3)
    if params.config.mode == "E3":
        g3 = g3 * np.array([1.0, 0.0, 1.0])
    frame = np.array([f_ij.e1, f_ij.e2, f_ij.e3])
    m_v = g2[:, None] * e_ij + g3 @ frame
    return m_s, m_v


def aggregate(messages) -> tuple[np.ndarray, np.ndarray]:
    """Componentwise sum of (scalar, vector-channel) message pairs."""
    scalars = np.sum([m[0] for m in messages], axis=0)
    vectors = np.sum([m[1] for m in messages], axis=0)
    return scalars, vectors


def node_update(m_i: tuple[np.ndarray, np.ndarray], h_i: np.ndarray,
                f_i: Frame, params: ModelParams, mode: str | None = None,
                layer: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Scalarize the aggregated message, mix through the MLP, tensorize back."""
    mode = mode or params.config.mode
    pre = f"L{layer}"
    ms, mv = m_i
    t = np.array([scalarize_vec(Vec3(*row), f_i, mode) for row in mv])
    cat = np.concatenate([h_i, ms, t.ravel()])[None, :]
    hidden = _np_silu(_np_linear(params, f"{pre}.upd.l1", cat))
    h_new = _np_linear(params, f"{pre}.upd.l2", hidden)[0]
    coef = _np_linear(params, f"{pre}.upd.vhead",
                      np.concatenate([t.ravel()[None, :], hidden], axis=1))
    coef = coef.reshape(-1, 3)
    if mode == "E3":
        coef = coef * np.array([1.0, 0.0, 1.0])
    frame = np.array([f_i.e1, f_i.e2, f_i.e3])
    v_new = coef @ frame
    return h_new, v_new
