"""
Differentiable operators: dilated convolution, pooling, upsampling, channel
concatenation, activations and the per-pixel channel softmax.

Every operator computes its result with numpy, wraps it in a ``Tensor`` and
registers a backward rule through ``record``. Backward rules return one
gradient per input (``None`` where an input takes no gradient).
"""
from __future__ import annotations

from typing import Literal

import numpy as np

from ..exceptions import ShapeError
from .tensor import Array, Tensor, record

Activation = Literal["relu", "sigmoid"]


def effective_kernel_extent(k: int, dilation: int) -> int:
    """Span covered by a ``k``-tap kernel whose taps sit ``dilation`` pixels apart."""
    if k < 1 or dilation < 1:
        raise ValueError(f"kernel size and dilation must be >= 1, got k={k}, dilation={dilation}")
    return k + (k - 1) * (dilation - 1)


def same_padding(k: int, dilation: int) -> int:
    """Zero padding that keeps spatial extents at stride 1."""
    return dilation * (k - 1) // 2


def conv_output_size(size: int, k: int, stride: int, dilation: int, padding: int) -> int:
    span = size + 2 * padding - effective_kernel_extent(k, dilation)
    if span < 0 or span % stride:
        raise ShapeError(
            f"input extent {size} with kernel {k}, dilation {dilation}, padding {padding} "
            f"and stride {stride} does not give an integer output size"
        )
    return span // stride + 1


def _tap_range(out_size: int, in_size: int, offset: int, stride: int) -> tuple[int, int]:
    """
    Output positions whose input coordinate ``o * stride + offset`` lands inside the input.

    Returns a half-open range ``(lo, hi)``; empty when ``lo >= hi``.
    """
    lo = 0 if offset >= 0 else (-offset + stride - 1) // stride
    last = in_size - 1 - offset
    hi = last // stride + 1 if last >= 0 else 0
    return lo, min(out_size, hi)


def _conv_taps(
    shape_in: tuple[int, int], shape_out: tuple[int, int], k: int, stride: int, dilation: int, padding: int
) -> list[tuple[int, int, slice, slice, slice, slice]]:
    """
    Enumerate the kernel taps that touch the input at least once.

    For each tap ``(i, j)`` the entry holds the output row/column slices it
    contributes to and the strided input row/column slices it reads. Taps that
    only ever read zero padding are skipped.
    """
    (h, w), (oh, ow) = shape_in, shape_out
    taps = []
    for i in range(k):
        row_off = i * dilation - padding
        y0, y1 = _tap_range(oh, h, row_off, stride)
        if y0 >= y1:
            continue
        r0 = y0 * stride + row_off
        rows_in = slice(r0, r0 + (y1 - y0 - 1) * stride + 1, stride)
        for j in range(k):
            col_off = j * dilation - padding
            x0, x1 = _tap_range(ow, w, col_off, stride)
            if x0 >= x1:
                continue
            c0 = x0 * stride + col_off
            cols_in = slice(c0, c0 + (x1 - x0 - 1) * stride + 1, stride)
            taps.append((i, j, slice(y0, y1), slice(x0, x1), rows_in, cols_in))
    return taps


def conv2d(
    x: Tensor,
    kernel: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    dilation: int = 1,
    padding: int | None = None,
) -> Tensor:
    """
    2-D cross-correlation with dilation, stride and zero padding.

    ``out[b, o, y, x] = bias[o] + sum_{c,i,j} in[b, c, y*s - pad + i*d, x*s - pad + j*d] * kernel[o, c, i, j]``
    with out-of-range reads treated as zero.

    The kernel is applied tap by tap: each tap is one (C -> O) matrix product over
    the output window it reaches, so no padded copy or patch matrix is built and
    taps of wide dilations that fall entirely in the padding cost nothing.

    Args:
        x: Input of shape (B, C, H, W)
        kernel: Weights of shape (O, C, k, k), k odd
        bias: Optional bias of shape (O,)
        stride: Output stride
        dilation: Spacing between kernel taps
        padding: Zero padding; ``None`` selects "same" padding ``d * (k - 1) / 2``

    Returns:
        Tensor of shape (B, O, H', W')
    """
    if x.data.ndim != 4 or kernel.data.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input and kernel, got {x.shape} and {kernel.shape}")
    batch, channels, h, w = x.shape
    out_ch, k_in, k, k2 = kernel.shape
    if k != k2 or k % 2 == 0:
        raise ShapeError(f"conv2d needs a square, odd kernel, got {k}x{k2}")
    if k_in != channels:
        raise ShapeError(f"kernel expects {k_in} input channels, input has {channels}")
    if bias is not None and bias.shape != (out_ch,):
        raise ShapeError(f"bias shape {bias.shape} does not match {out_ch} output channels")
    if stride < 1 or dilation < 1:
        raise ShapeError(f"stride and dilation must be >= 1, got {stride} and {dilation}")
    pad = same_padding(k, dilation) if padding is None else padding
    oh = conv_output_size(h, k, stride, dilation, pad)
    ow = conv_output_size(w, k, stride, dilation, pad)

    xd, wd = x.data, kernel.data
    taps = _conv_taps((h, w), (oh, ow), k, stride, dilation, pad)
    out = np.zeros((batch, out_ch, oh, ow), dtype=np.result_type(xd, wd))
    for i, j, ys, xs, rows, cols in taps:
        # (O, C) x (B, C, h, w) -> (O, B, h, w)
        contrib = np.tensordot(wd[:, :, i, j], xd[:, :, rows, cols], axes=([1], [1]))
        out[:, :, ys, xs] += contrib.transpose(1, 0, 2, 3)
    if bias is not None:
        out += bias.data.reshape(1, -1, 1, 1)

    def rule(grad: Array) -> tuple[Array | None, ...]:
        grad_x = np.zeros_like(xd) if x.requires_grad else None
        grad_w = np.zeros_like(wd) if kernel.requires_grad else None
        for i, j, ys, xs, rows, cols in taps:
            g = grad[:, :, ys, xs]
            if grad_x is not None:
                # (B, O, h, w) x (O, C) -> (B, h, w, C)
                back = np.tensordot(g, wd[:, :, i, j], axes=([1], [0]))
                grad_x[:, :, rows, cols] += back.transpose(0, 3, 1, 2)
            if grad_w is not None:
                grad_w[:, :, i, j] += np.tensordot(g, xd[:, :, rows, cols], axes=([0, 2, 3], [0, 2, 3]))
        grads: list[Array | None] = [grad_x, grad_w]
        if bias is not None:
            grads.append(grad.sum(axis=(0, 2, 3)) if bias.requires_grad else None)
        return grads

    inputs = [x, kernel] if bias is None else [x, kernel, bias]
    return record(inputs, Tensor(out), rule, "conv2d")


def max_pool2d(x: Tensor, window: int = 2) -> Tensor:
    """
    Non-overlapping max pooling.

    The backward pass routes each window's gradient to its maximum; ties go to
    the first cell in row-major order.
    """
    batch, channels, h, w = x.shape
    if window < 1 or h % window or w % window:
        raise ShapeError(f"spatial extent {h}x{w} is not divisible by pooling window {window}")
    oh, ow = h // window, w // window
    blocks = (
        x.data.reshape(batch, channels, oh, window, ow, window)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(batch, channels, oh, ow, window * window)
    )
    winner = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, winner[..., None], axis=-1)[..., 0]

    def rule(grad: Array) -> tuple[Array]:
        routed = np.zeros_like(blocks)
        np.put_along_axis(routed, winner[..., None], grad[..., None], axis=-1)
        grad_x = (
            routed.reshape(batch, channels, oh, ow, window, window)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(batch, channels, h, w)
        )
        return (grad_x,)

    return record([x], Tensor(out), rule, "max_pool2d")


def upsample2d_nearest(x: Tensor, factor: int = 2) -> Tensor:
    """Replicate every cell into a ``factor`` x ``factor`` block."""
    if factor < 1:
        raise ShapeError(f"upsampling factor must be >= 1, got {factor}")
    batch, channels, h, w = x.shape
    out = np.repeat(np.repeat(x.data, factor, axis=2), factor, axis=3)

    def rule(grad: Array) -> tuple[Array]:
        return (grad.reshape(batch, channels, h, factor, w, factor).sum(axis=(3, 5)),)

    return record([x], Tensor(out), rule, "upsample2d_nearest")


def concat_channels(*tensors: Tensor) -> Tensor:
    """Concatenate along the channel axis; earlier arguments come first."""
    if len(tensors) < 2:
        raise ShapeError("concat_channels needs at least two tensors")
    head = tensors[0].shape
    for t in tensors[1:]:
        if t.data.ndim != 4 or t.shape[0] != head[0] or t.shape[2:] != head[2:]:
            raise ShapeError(f"cannot concatenate {t.shape} onto {head}: batch/spatial extents differ")
    out = np.concatenate([t.data for t in tensors], axis=1)
    bounds = np.cumsum([t.shape[1] for t in tensors])[:-1]

    def rule(grad: Array) -> list[Array]:
        return np.split(grad, bounds, axis=1)

    return record(tensors, Tensor(out), rule, "concat_channels")


def _relu_grad(x: Array) -> Array:
    return (x > 0).astype(x.dtype)


def _sigmoid(x: Array) -> Array:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activation(x: Tensor, kind: Activation) -> Tensor:
    """Elementwise relu (subgradient 0 at 0) or sigmoid."""
    xd = x.data
    if kind == "relu":
        out = np.maximum(xd, 0)

        def rule(grad: Array) -> tuple[Array]:
            return (grad * _relu_grad(xd),)

    elif kind == "sigmoid":
        out = _sigmoid(xd)

        def rule(grad: Array) -> tuple[Array]:
            return (grad * out * (1 - out),)

    else:
        raise ValueError(f"unknown activation {kind!r}")
    return record([x], Tensor(out), rule, kind)


def relu(x: Tensor) -> Tensor:
    return activation(x, "relu")


def sigmoid(x: Tensor) -> Tensor:
    return activation(x, "sigmoid")


def softmax_channels(x: Tensor) -> Tensor:
    """Per-pixel softmax over axis 1, shifted by the channel maximum for stability."""
    if x.data.ndim != 4 or x.shape[1] < 2:
        raise ShapeError(f"softmax_channels needs (B, K>=2, H, W), got {x.shape}")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def rule(grad: Array) -> tuple[Array]:
        return (out * (grad - (grad * out).sum(axis=1, keepdims=True)),)

    return record([x], Tensor(out), rule, "softmax_channels")


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add needs equal shapes, got {a.shape} and {b.shape}")

    def rule(grad: Array) -> tuple[Array, Array]:
        return grad, grad

    return record([a, b], Tensor(a.data + b.data), rule, "add")


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"mul needs equal shapes, got {a.shape} and {b.shape}")
    ad, bd = a.data, b.data

    def rule(grad: Array) -> tuple[Array, Array]:
        return grad * bd, grad * ad

    return record([a, b], Tensor(ad * bd), rule, "mul")


def sum_all(x: Tensor) -> Tensor:
    shape = x.shape

    def rule(grad: Array) -> tuple[Array]:
        return (np.broadcast_to(grad.reshape(()), shape).copy(),)

    return record([x], Tensor(np.asarray(x.data.sum(), dtype=x.dtype)), rule, "sum")
