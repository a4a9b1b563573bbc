"""Reverse-mode automatic differentiation over numpy float64 arrays.

A :class:`Tensor` wraps an ndarray and remembers one vector-Jacobian closure
per parent. The closures are written in terms of tape operations themselves,
so a gradient is again a differentiable Tensor — which matters here because
forces are gradients of the energy and the force loss is differentiated
through them (gradient-of-gradient).

Operations where no input requires a gradient fold to constants: no parents,
no closures, so forward-only evaluation carries no tape overhead.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("data", "parents", "requires_grad")

    def __init__(self, data, parents=(), requires_grad=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.parents = parents
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p, _ in parents)
        self.requires_grad = requires_grad

    # -- introspection ------------------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        tag = "leaf" if self.requires_grad and not self.parents else (
            "node" if self.requires_grad else "const")
        return f"Tensor({tag}, shape={self.shape})"

    # -- operator sugar ------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return pow_const(self, p)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def leaf(data) -> Tensor:
    """A differentiable input (parameter or position array)."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def constant(data) -> Tensor:
    return Tensor(data)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape))


_grad_enabled = True


class no_grad:
    """Context under which operations do not record VJPs (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def _make(data, *pairs) -> Tensor:
    if not _grad_enabled:
        return Tensor(data)
    live = tuple((p, fn) for p, fn in pairs if p.requires_grad)
    if not live:
        return Tensor(data)
    return Tensor(data, parents=live, requires_grad=True)


def _unbroadcast(g: Tensor, shape) -> Tensor:
    """Sum a broadcasted gradient back down to `shape` (tape ops throughout)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = sum_(g, axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = sum_(g, axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# arithmetic primitives


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data + b.data,
        (a, lambda g: _unbroadcast(g, a.shape)),
        (b, lambda g: _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data - b.data,
        (a, lambda g: _unbroadcast(g, a.shape)),
        (b, lambda g: _unbroadcast(neg(g), b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data * b.data,
        (a, lambda g: _unbroadcast(mul(g, b), a.shape)),
        (b, lambda g: _unbroadcast(mul(g, a), b.shape)),
    )


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data / b.data,
        (a, lambda g: _unbroadcast(div(g, b), a.shape)),
        (b, lambda g: _unbroadcast(neg(div(mul(g, a), mul(b, b))), b.shape)),
    )


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _make(-a.data, (a, lambda g: neg(g)))


def pow_const(a, p: float) -> Tensor:
    a = as_tensor(a)
    p = float(p)
    return _make(
        a.data ** p,
        (a, lambda g: mul(g, mul(constant(p), pow_const(a, p - 1.0)))),
    )


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = _make(np.exp(a.data), (a, lambda g: mul(g, out)))
    return out


def log(a) -> Tensor:
    a = as_tensor(a)
    return _make(np.log(a.data), (a, lambda g: div(g, a)))


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out = _make(np.sqrt(a.data), (a, lambda g: div(mul(g, constant(0.5)), out)))
    return out


def sin(a) -> Tensor:
    a = as_tensor(a)
    return _make(np.sin(a.data), (a, lambda g: mul(g, cos(a))))


def cos(a) -> Tensor:
    a = as_tensor(a)
    return _make(np.cos(a.data), (a, lambda g: neg(mul(g, sin(a)))))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    x = a.data
    s = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                 np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = _make(s, (a, lambda g: mul(g, mul(out, sub(1.0, out)))))
    return out


def silu(a) -> Tensor:
    a = as_tensor(a)
    return mul(a, sigmoid(a))


def abs_(a) -> Tensor:
    # the sign enters as a constant: subgradient 0 at the kink
    a = as_tensor(a)
    s = constant(np.sign(a.data))
    return _make(np.abs(a.data), (a, lambda g: mul(g, s)))


# ---------------------------------------------------------------------------
# shape and indexing primitives


def sum_(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is not None and not isinstance(axis, tuple):
        axis = (axis,)
    if axis is not None:
        axis = tuple(ax % a.ndim for ax in axis)
    kept = (
        tuple(1 for _ in a.shape) if axis is None
        else tuple(1 if i in axis else s for i, s in enumerate(a.shape))
    )

    def vjp(g):
        if not keepdims:
            g = reshape(g, kept)
        return broadcast_to(g, a.shape)

    return _make(np.sum(a.data, axis=axis, keepdims=keepdims), (a, vjp))


def mean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax % a.ndim] for ax in axes]))
    return mul(sum_(a, axis=axis, keepdims=keepdims), constant(1.0 / count))


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    return _make(a.data.reshape(shape), (a, lambda g: reshape(g, a.shape)))


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    inv = tuple(np.argsort(axes))
    return _make(np.transpose(a.data, axes), (a, lambda g: transpose(g, inv)))


def broadcast_to(a, shape) -> Tensor:
    a = as_tensor(a)
    return _make(
        np.broadcast_to(a.data, shape).copy(),
        (a, lambda g: _unbroadcast(g, a.shape)),
    )


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    return _make(
        a.data @ b.data,
        (a, lambda g: matmul(g, transpose(b))),
        (b, lambda g: matmul(transpose(a), g)),
    )


def getitem(a, idx) -> Tensor:
    a = as_tensor(a)
    if isinstance(idx, (list, np.ndarray)):
        idx = np.asarray(idx)
    return _make(a.data[idx], (a, lambda g: scatter_add(g, idx, a.shape)))


def _rowsum(idx: np.ndarray, data: np.ndarray, num: int) -> np.ndarray:
    """Sum rows of `data` into `num` buckets; bincount fast path for 2-D."""
    if data.ndim == 2:
        d = data.shape[1]
        flat = np.bincount(
            (idx[:, None] * d + np.arange(d)).ravel(),
            weights=data.ravel(), minlength=num * d)
        return flat.reshape(num, d)
    out = np.zeros((num,) + data.shape[1:])
    np.add.at(out, idx, data)
    return out


def scatter_add(a, idx, shape) -> Tensor:
    """Adjoint of getitem: accumulate rows of `a` at `idx` into zeros(shape)."""
    a = as_tensor(a)
    if isinstance(idx, np.ndarray) and idx.ndim == 1 and len(shape) == a.ndim:
        out = _rowsum(idx, a.data, shape[0])
    else:
        out = np.zeros(shape)
        np.add.at(out, idx, a.data)
    return _make(out, (a, lambda g: getitem(g, idx)))


def gather(a, index) -> Tensor:
    """Row lookup along axis 0 (integer array index)."""
    return getitem(a, np.asarray(index, dtype=np.intp))


def segment_sum(a, segment_ids, num_segments: int) -> Tensor:
    """Sum rows of `a` into `num_segments` buckets given per-row bucket ids."""
    seg = np.asarray(segment_ids, dtype=np.intp)
    a = as_tensor(a)
    return _make(_rowsum(seg, a.data, num_segments),
                 (a, lambda g: getitem(g, seg)))


def concatenate(parts, axis=0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    axis = axis % parts[0].ndim
    data = np.concatenate([p.data for p in parts], axis=axis)
    pairs = []
    off = 0
    for p in parts:
        n = p.shape[axis]
        sl = (slice(None),) * axis + (slice(off, off + n),)
        pairs.append((p, lambda g, sl=sl: getitem(g, sl)))
        off += n
    return _make(data, *pairs)


def where(mask, a, b) -> Tensor:
    """Constant-mask select: mask*a + (1-mask)*b (mask is plain ndarray)."""
    m = constant(np.asarray(mask, dtype=np.float64))
    return add(mul(m, as_tensor(a)), mul(sub(1.0, m), as_tensor(b)))


# ---------------------------------------------------------------------------
# the engine


def _toposort(output: Tensor) -> list[Tensor]:
    order, seen, stack = [], set(), [(output, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p, _ in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def gradients(output: Tensor, wrt, grad_output: Tensor | None = None) -> list[Tensor]:
    """Gradients of `output` w.r.t. each tensor in `wrt` (zeros if unreached).

    The result tensors are built with tape operations, so they can be
    differentiated again.
    """
    if grad_output is None:
        grad_output = constant(np.ones(output.shape))
    wrt_ids = {id(w) for w in wrt}
    table: dict[int, Tensor] = {id(output): grad_output}
    for node in reversed(_toposort(output)):
        g = table.get(id(node))
        if g is None:
            continue
        if id(node) not in wrt_ids:
            del table[id(node)]
        for p, vjp in node.parents:
            contrib = vjp(g)
            prev = table.get(id(p))
            table[id(p)] = contrib if prev is None else add(prev, contrib)
    return [table[id(w)] if table.get(id(w)) is not None else zeros(w.shape)
            for w in wrt]


class GradientTape:
    """Facade over the implicit tape: operations on Tensors record themselves.

    `watch` marks an array differentiable; `gradient` runs reverse
    accumulation over everything recorded downstream of it.
    """

    @staticmethod
    def watch(data) -> Tensor:
        return leaf(data)

    @staticmethod
    def gradient(output: Tensor, wrt, grad_output: Tensor | None = None):
        return gradients(output, wrt, grad_output)


def finite_diff_grad(f, x, eps: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += eps
        xm[k] -= eps
        out[k] = (f(xp) - f(xm)) / (2.0 * eps)
    return out
