"""
Slow, obviously-correct reference implementations used as oracles.
"""
from __future__ import annotations

import numpy as np

from .ops import effective_kernel_extent
from .tensor import Array


def conv2d_direct(
    x: Array, kernel: Array, bias: Array | None, stride: int, dilation: int, padding: int
) -> Array:
    """Direct summation over every output cell and every tap."""
    batch, channels, h, w = x.shape
    out_ch, _, k, _ = kernel.shape
    extent = effective_kernel_extent(k, dilation)
    oh = (h + 2 * padding - extent) // stride + 1
    ow = (w + 2 * padding - extent) // stride + 1
    out = np.zeros((batch, out_ch, oh, ow), dtype=np.float64)
    for b in range(batch):
        for o in range(out_ch):
            for y in range(oh):
                for xx in range(ow):
                    acc = 0.0 if bias is None else float(bias[o])
                    for c in range(channels):
                        for i in range(k):
                            r = y * stride - padding + i * dilation
                            if r < 0 or r >= h:
                                continue
                            for j in range(k):
                                q = xx * stride - padding + j * dilation
                                if 0 <= q < w:
                                    acc += float(x[b, c, r, q]) * float(kernel[o, c, i, j])
                    out[b, o, y, xx] = acc
    return out


def dilate_kernel(kernel: Array, dilation: int) -> Array:
    """Zero-interleave a kernel so a dilation-1 convolution reproduces the dilated one."""
    out_ch, channels, k, _ = kernel.shape
    extent = effective_kernel_extent(k, dilation)
    wide = np.zeros((out_ch, channels, extent, extent), dtype=kernel.dtype)
    wide[:, :, ::dilation, ::dilation] = kernel
    return wide


def tap_span(k: int, dilation: int) -> int:
    """Distance from the first to the last nonzero tap of the zero-interleaved kernel, plus one."""
    taps = np.flatnonzero(dilate_kernel(np.ones((1, 1, k, k)), dilation)[0, 0, 0])
    return int(taps[-1] - taps[0] + 1)
