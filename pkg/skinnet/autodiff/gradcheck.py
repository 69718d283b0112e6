"""
Central finite-difference gradient checking.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .ops import mul, sum_all
from .tensor import Array, Tape, Tensor, backward

ScalarFn = Callable[..., Tensor]


class GradcheckResult(BaseModel):
    max_rel_error: float
    per_input: list[float] = Field(default_factory=list)
    rtol: float = 1e-4
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_rel_error)) and self.max_rel_error < self.rtol


def scalarize(fn: ScalarFn, seed: int = 0) -> ScalarFn:
    """
    Turn a tensor-valued function into a scalar one by a fixed random projection.

    The projection weights are drawn once per output shape, so repeated
    evaluations (as finite differences need) see the same weights.
    """
    weights: dict[tuple[int, ...], Tensor] = {}

    def wrapped(*inputs: Tensor) -> Tensor:
        out = fn(*inputs)
        if out.shape not in weights:
            rng = np.random.default_rng(seed)
            weights[out.shape] = Tensor(rng.standard_normal(out.shape), dtype=out.dtype)
        return sum_all(mul(out, weights[out.shape]))

    return wrapped


def kink_pattern(fn: ScalarFn, inputs: Sequence[Tensor]) -> list[Array]:
    """
    Which side of its kink every relu input sits on, and which cells win every
    max-pool window, for one evaluation of ``fn``.
    """
    with Tape() as tape:
        fn(*inputs)
    pattern: list[Array] = []
    for node in tape.nodes:
        if node.op == "relu":
            pattern.append(node.inputs[0].data > 0)
        elif node.op == "max_pool2d":
            x, out = node.inputs[0].data, node.output.data
            f = x.shape[2] // out.shape[2]
            pattern.append(x == np.repeat(np.repeat(out, f, axis=2), f, axis=3))
    return pattern


def _same_pattern(a: list[Array], b: list[Array]) -> bool:
    return len(a) == len(b) and all(np.array_equal(p, q) for p, q in zip(a, b, strict=True))


def smooth_around(fn: ScalarFn, inputs: Sequence[Tensor], which: int, idx: int, h: float, base: list[Array]) -> bool:
    """True when moving entry ``idx`` of ``inputs[which]`` by +-h leaves ``base`` unchanged."""
    flat = inputs[which].data.reshape(-1)
    original = flat[idx]
    try:
        for step in (h, -h):
            flat[idx] = original + step
            if not _same_pattern(kink_pattern(fn, inputs), base):
                return False
    finally:
        flat[idx] = original
    return True


def numerical_grad(fn: ScalarFn, inputs: Sequence[Tensor], which: int, h: float, entries: Array) -> Array:
    """Central differences of ``fn(*inputs)`` w.r.t. the flat ``entries`` of ``inputs[which]``."""
    flat = inputs[which].data.reshape(-1)
    estimates = np.empty(len(entries), dtype=np.float64)
    for n, idx in enumerate(entries):
        original = flat[idx]
        flat[idx] = original + h
        plus = fn(*inputs).item()
        flat[idx] = original - h
        minus = fn(*inputs).item()
        flat[idx] = original
        estimates[n] = (plus - minus) / (2 * h)
    return estimates


def gradcheck(
    fn: ScalarFn,
    inputs: Sequence[Tensor],
    h: float = 1e-3,
    rtol: float = 1e-4,
    max_entries: int | None = None,
    seed: int = 0,
    skip_kinks: bool = False,
) -> GradcheckResult:
    """
    Compare reverse-mode gradients of a scalar function against central differences.

    Only inputs with ``requires_grad`` are checked. The error for one input is
    ``max|analytic - numeric| / max(max|analytic|, max|numeric|, 1e-12)``; the
    result reports the worst input.

    Args:
        fn: Function of ``inputs`` returning a scalar tensor
        inputs: Tensors to differentiate (use float64 data)
        h: Finite-difference step
        rtol: Pass threshold for the relative error
        max_entries: Check at most this many randomly chosen entries per input
        seed: Seed for choosing entries
        skip_kinks: Replace entries whose +-h step moves a relu input across zero
            or changes a max-pool winner; the count lands in ``skipped``

    Returns:
        GradcheckResult with per-input and worst relative errors
    """
    for t in inputs:
        t.zero_grad()
    with Tape() as tape:
        loss = fn(*inputs)
    backward(loss, tape)

    base = kink_pattern(fn, inputs) if skip_kinks else []
    rng = np.random.default_rng(seed)
    errors: list[float] = []
    skipped = 0
    for which, tensor in enumerate(inputs):
        if not tensor.requires_grad:
            continue
        analytic_full = np.zeros(tensor.size) if tensor.grad is None else tensor.grad.reshape(-1)
        limit = tensor.size if max_entries is None else min(max_entries, tensor.size)
        if skip_kinks:
            chosen: list[int] = []
            for idx in rng.permutation(tensor.size):
                if smooth_around(fn, inputs, which, int(idx), h, base):
                    chosen.append(int(idx))
                    if len(chosen) == limit:
                        break
                else:
                    skipped += 1
            if not chosen:
                continue
            entries = np.sort(np.asarray(chosen, dtype=np.int64))
        elif limit < tensor.size:
            entries = np.sort(rng.choice(tensor.size, size=limit, replace=False))
        else:
            entries = np.arange(tensor.size)
        numeric = numerical_grad(fn, inputs, which, h, entries)
        analytic = analytic_full[entries].astype(np.float64)
        scale = max(float(np.abs(analytic).max()), float(np.abs(numeric).max()), 1e-12)
        errors.append(float(np.abs(analytic - numeric).max()) / scale)
    return GradcheckResult(max_rel_error=max(errors, default=0.0), per_input=errors, rtol=rtol, skipped=skipped)
