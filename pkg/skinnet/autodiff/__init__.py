"""Tensors, reverse-mode differentiation and the operator set the network needs."""

from .ops import (
    activation,
    add,
    concat_channels,
    conv2d,
    effective_kernel_extent,
    max_pool2d,
    mul,
    relu,
    sigmoid,
    softmax_channels,
    sum_all,
    upsample2d_nearest,
)
from .tensor import Tape, Tensor, active_tape, backward, default_dtype, get_default_dtype

__all__ = [
    "Tape",
    "Tensor",
    "activation",
    "active_tape",
    "add",
    "backward",
    "concat_channels",
    "conv2d",
    "default_dtype",
    "effective_kernel_extent",
    "get_default_dtype",
    "max_pool2d",
    "mul",
    "relu",
    "sigmoid",
    "softmax_channels",
    "sum_all",
    "upsample2d_nearest",
]
