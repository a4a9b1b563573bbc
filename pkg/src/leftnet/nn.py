"""Parameter initialization and small functional layers on the tape.

Parameters live in a plain insertion-ordered dict of name -> leaf Tensor;
that declaration order is also the checkpoint serialization order.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

Params = dict[str, Tensor]


def init_linear(params: Params, rng: np.random.Generator, name: str,
                fan_in: int, fan_out: int, bias: bool = True) -> None:
    """Uniform fan-in init (bound sqrt(6/fan_in)), zero bias."""
    bound = np.sqrt(6.0 / fan_in)
    params[f"{name}.w"] = ad.leaf(rng.uniform(-bound, bound, (fan_in, fan_out)))
    if bias:
        params[f"{name}.b"] = ad.leaf(np.zeros(fan_out))


def init_mlp(params: Params, rng: np.random.Generator, name: str,
             fan_in: int, hidden: int, fan_out: int) -> None:
    init_linear(params, rng, f"{name}.l1", fan_in, hidden)
    init_linear(params, rng, f"{name}.l2", hidden, fan_out)


def init_embedding(params: Params, rng: np.random.Generator, name: str,
                   num_entries: int, dim: int) -> None:
    bound = np.sqrt(6.0 / dim)
    params[name] = ad.leaf(rng.uniform(-bound, bound, (num_entries, dim)))


def linear(params: Params, name: str, x: Tensor) -> Tensor:
    y = ad.matmul(x, params[f"{name}.w"])
    b = params.get(f"{name}.b")
    return y if b is None else ad.add(y, b)


def mlp(params: Params, name: str, x: Tensor) -> Tensor:
    """Two-layer perceptron: linear -> SiLU -> linear."""
    return linear(params, f"{name}.l2", ad.silu(linear(params, f"{name}.l1", x)))


def embedding(params: Params, name: str, index: np.ndarray) -> Tensor:
    return ad.gather(params[name], np.asarray(index, dtype=np.intp))
