"""
Adam with bias-corrected moment estimates.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Tensor
from ..autodiff.tensor import Array
from ..exceptions import ShapeError


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)


def adam_step(params: Mapping[str, Tensor], grads: Mapping[str, Array | None], state: AdamState) -> None:
    """
    One in-place Adam update of every parameter.

    ``theta -= lr * (m / (1 - beta1^t)) / (sqrt(v / (1 - beta2^t)) + eps)``.
    A missing gradient is treated as zero (the moments still decay).

    Raises:
        ShapeError: a gradient's shape differs from its parameter's
    """
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t

    for name, param in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(param.data)
        elif g.shape != param.shape:
            raise ShapeError(f"{name}: gradient shape {g.shape} != parameter shape {param.shape}")

        if name not in state.m:
            state.m[name] = np.zeros_like(param.data)
            state.v[name] = np.zeros_like(param.data)
        m, v = state.m[name], state.v[name]

        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        m_hat = m / bc1
        v_hat = v / bc2
        param.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def model_grads(params: Mapping[str, Tensor]) -> dict[str, Array | None]:
    return {name: t.grad for name, t in params.items()}
