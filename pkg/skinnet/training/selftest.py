"""
Built-in verification suites.

``grad`` compares every differentiable operation, and a toy end-to-end model,
against central finite differences in 64-bit arithmetic. ``oracle`` compares
convolution, metrics, the Dice loss and Adam against slow reference
computations.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel

from ..autodiff import (
    Tensor,
    add,
    concat_channels,
    conv2d,
    default_dtype,
    effective_kernel_extent,
    max_pool2d,
    mul,
    relu,
    sigmoid,
    softmax_channels,
    sum_all,
    upsample2d_nearest,
)
from ..autodiff.gradcheck import GradcheckResult, gradcheck, scalarize
from ..autodiff.ops import same_padding
from ..autodiff.reference import conv2d_direct, dilate_kernel, tap_span
from ..data.encoding import one_hot
from ..network.blocks import DEFAULT_RATES
from ..network.model import ModelSpec, build_skinnet, forward
from ..objective.loss import dice_loss
from ..objective.metrics import ConfusionCounts, confusion, metrics
from ..optim.adam import AdamState, adam_step

SelftestMode = Literal["grad", "oracle", "all"]

GRAD_RTOL = 1e-4
GRAD_STEP = 1e-3
CONV_ATOL = 1e-6
ADAM_ATOL = 1e-10


class CheckResult(BaseModel):
    suite: str
    name: str
    passed: bool
    value: float
    detail: str = ""


class SelftestReport(BaseModel):
    mode: SelftestMode
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict[str, tuple[int, int]]:
        """Per check name: (passed, total)."""
        out: dict[str, tuple[int, int]] = {}
        for c in self.checks:
            ok, total = out.get(c.name, (0, 0))
            out[c.name] = (ok + c.passed, total + 1)
        return out


def _grad_check(name: str, result: GradcheckResult, detail: str = "") -> CheckResult:
    return CheckResult(
        suite="grad", name=name, passed=result.passed, value=result.max_rel_error, detail=detail
    )


def _param(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.standard_normal(shape), requires_grad=True)


def _away_from_zero(rng: np.random.Generator, *shape: int) -> Tensor:
    magnitude = rng.uniform(0.1, 1.0, size=shape)
    return Tensor(np.where(rng.random(shape) < 0.5, -magnitude, magnitude), requires_grad=True)


def _conv_case(rng: np.random.Generator) -> CheckResult:
    stride = int(rng.choice([1, 2]))
    dilation = int(rng.choice([1, 2, 3]))
    k = int(rng.choice([1, 3]))
    channels, out_ch = (int(v) for v in rng.integers(1, 4, size=2))
    size = 2 * int(rng.integers(1, 4)) + 1 if stride == 2 else int(rng.integers(3, 8))
    x = _param(rng, 2, channels, size, size)
    kernel = _param(rng, out_ch, channels, k, k)
    bias = _param(rng, out_ch)
    fn = scalarize(lambda a, w, b: conv2d(a, w, b, stride=stride, dilation=dilation), seed=int(rng.integers(1 << 31)))
    detail = f"k={k} s={stride} d={dilation} C={channels} O={out_ch} H={size}"
    return _grad_check("conv2d", gradcheck(fn, [x, kernel, bias], h=GRAD_STEP, rtol=GRAD_RTOL), detail)


def _pool_case(rng: np.random.Generator) -> CheckResult:
    h, w = 2 * int(rng.integers(1, 4)), 2 * int(rng.integers(1, 4))
    n = 2 * 3 * h * w
    # distinct values 0.1 apart keep every window's maximum unique under the step
    x = Tensor(rng.permutation(n).reshape(2, 3, h, w) * 0.1, requires_grad=True)
    fn = scalarize(lambda a: max_pool2d(a, 2), seed=int(rng.integers(1 << 31)))
    return _grad_check("max_pool2d", gradcheck(fn, [x], h=GRAD_STEP, rtol=GRAD_RTOL))


def _upsample_case(rng: np.random.Generator) -> CheckResult:
    x = _param(rng, 2, 2, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
    fn = scalarize(lambda a: upsample2d_nearest(a, 2), seed=int(rng.integers(1 << 31)))
    return _grad_check("upsample2d_nearest", gradcheck(fn, [x], h=GRAD_STEP, rtol=GRAD_RTOL))


def _concat_case(rng: np.random.Generator) -> CheckResult:
    h = int(rng.integers(1, 5))
    a = _param(rng, 2, int(rng.integers(1, 4)), h, h)
    b = _param(rng, 2, int(rng.integers(1, 4)), h, h)
    fn = scalarize(concat_channels, seed=int(rng.integers(1 << 31)))
    return _grad_check("concat_channels", gradcheck(fn, [a, b], h=GRAD_STEP, rtol=GRAD_RTOL))


def _relu_case(rng: np.random.Generator) -> CheckResult:
    x = _away_from_zero(rng, 2, 3, 4, 4)
    fn = scalarize(relu, seed=int(rng.integers(1 << 31)))
    return _grad_check("relu", gradcheck(fn, [x], h=GRAD_STEP, rtol=GRAD_RTOL))


def _sigmoid_case(rng: np.random.Generator) -> CheckResult:
    x = Tensor(rng.uniform(-4, 4, size=(2, 3, 4, 4)), requires_grad=True)
    fn = scalarize(sigmoid, seed=int(rng.integers(1 << 31)))
    return _grad_check("sigmoid", gradcheck(fn, [x], h=GRAD_STEP, rtol=GRAD_RTOL))


def _softmax_case(rng: np.random.Generator) -> CheckResult:
    x = Tensor(rng.uniform(-3, 3, size=(2, int(rng.integers(2, 5)), 3, 3)), requires_grad=True)
    fn = scalarize(softmax_channels, seed=int(rng.integers(1 << 31)))
    return _grad_check("softmax_channels", gradcheck(fn, [x], h=GRAD_STEP, rtol=GRAD_RTOL))


def _dice_case(rng: np.random.Generator) -> CheckResult:
    classes = int(rng.integers(2, 4))
    y = one_hot(rng.integers(0, classes, size=(2, 4, 4)), classes, dtype=np.float64)
    yhat = Tensor(rng.uniform(0.05, 1.0, size=y.shape), requires_grad=True)
    return _grad_check("dice_loss", gradcheck(lambda p: dice_loss(y, p), [yhat], h=GRAD_STEP, rtol=GRAD_RTOL))


def _graph_case(rng: np.random.Generator) -> CheckResult:
    a = _param(rng, 2, 3, 3, 3)
    b = _param(rng, 2, 3, 3, 3)
    result = gradcheck(lambda p, q: sum_all(mul(add(p, q), p)), [a, b], h=GRAD_STEP, rtol=GRAD_RTOL)
    return _grad_check("add_mul_sum", result)


def _model_case(rng: np.random.Generator) -> CheckResult:
    spec = ModelSpec(depth=1, base_growth=2, input_size=8, rates=(1, 2))
    model = build_skinnet(spec, rng_seed=int(rng.integers(1 << 31)), dtype=np.float64)
    # zero biases behind dead relu channels leave pre-activations sitting exactly on the kink
    for name, t in model.named_parameters():
        if name.endswith("/bias"):
            t.data[...] = rng.uniform(-0.1, 0.1, size=t.shape)
    x = Tensor(rng.uniform(0, 1, size=(1, 3, 8, 8)), requires_grad=True)
    y = one_hot(rng.integers(0, 2, size=(1, 8, 8)), 2, dtype=np.float64)
    inputs = [x, *model.parameters.values()]

    def loss(batch: Tensor, *_: Tensor) -> Tensor:
        return dice_loss(y, forward(model, batch))

    result = gradcheck(
        loss,
        inputs,
        h=GRAD_STEP,
        rtol=GRAD_RTOL,
        max_entries=3,
        seed=int(rng.integers(1 << 31)),
        skip_kinks=True,
    )
    return _grad_check("toy_model", result, f"{len(inputs)} inputs, {result.skipped} entries skipped at kinks")


GRAD_CASES: tuple[Callable[[np.random.Generator], CheckResult], ...] = (
    _conv_case,
    _pool_case,
    _upsample_case,
    _concat_case,
    _relu_case,
    _sigmoid_case,
    _softmax_case,
    _dice_case,
    _graph_case,
    _model_case,
)


def grad_suite(cases: int = 20, seed: int = 0) -> list[CheckResult]:
    """``cases`` random gradient checks per operation plus the toy model, all in float64."""
    results: list[CheckResult] = []
    with default_dtype(np.float64):
        for n, case in enumerate(GRAD_CASES):
            for i in range(cases):
                results.append(case(np.random.default_rng([seed, n, i])))
    return results


def _oracle(name: str, error: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(
        suite="oracle", name=name, passed=bool(math.isfinite(error) and error <= tol), value=error, detail=detail
    )


def _conv_oracle_cases(rng: np.random.Generator, cases: int) -> Iterator[CheckResult]:
    dilations, strides = (1, 2, 3, 4), (1, 2)
    for i in range(cases):
        dilation, stride = dilations[i % 4], strides[(i // 4) % 2]
        k = int(rng.choice([1, 3]))
        extent = effective_kernel_extent(k, dilation)
        padding = same_padding(k, dilation) if rng.random() < 0.5 else 0
        # extent - 2p + stride * m makes the output size m + 1 exactly
        size = extent - 2 * padding + stride * int(rng.integers(0, 4))
        channels, out_ch = (int(v) for v in rng.integers(1, 4, size=2))
        x = rng.standard_normal((2, channels, size, size))
        w = rng.standard_normal((out_ch, channels, k, k))
        b = rng.standard_normal(out_ch)

        fast = conv2d(Tensor(x), Tensor(w), Tensor(b), stride=stride, dilation=dilation, padding=padding).data
        slow = conv2d_direct(x, w, b, stride, dilation, padding)
        detail = f"k={k} s={stride} d={dilation} p={padding} H={size}"
        yield _oracle("conv2d_direct", float(np.abs(fast - slow).max()), CONV_ATOL, detail)

        wide = conv2d(Tensor(x), Tensor(dilate_kernel(w, dilation)), stride=stride, padding=padding).data
        dilated = conv2d(Tensor(x), Tensor(w), stride=stride, dilation=dilation, padding=padding).data
        yield _oracle("dilation_law", float(np.abs(wide - dilated).max()), CONV_ATOL, detail)

        z = rng.standard_normal(x.shape)
        alpha, beta = rng.standard_normal(2)
        def conv(a: np.ndarray) -> np.ndarray:
            return conv2d(Tensor(a), Tensor(w), stride=stride, dilation=dilation, padding=padding).data

        lhs = conv(alpha * x + beta * z)
        rhs = alpha * conv(x) + beta * conv(z)
        yield _oracle("conv_linearity", float(np.abs(lhs - rhs).max()), CONV_ATOL, detail)


def _extent_oracle() -> Iterator[CheckResult]:
    for rate in DEFAULT_RATES:
        error = abs(effective_kernel_extent(3, rate) - tap_span(3, rate))
        yield _oracle("receptive_field", float(error), 0.0, f"rate={rate}")
    yield _oracle("receptive_field", float(abs(effective_kernel_extent(3, 2) - 5)), 0.0, "3x3 at rate 2 spans 5x5")


def _count_oracle(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    tp = fp = tn = fn = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist(), strict=True):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _metric_oracle_cases(rng: np.random.Generator, cases: int) -> Iterator[CheckResult]:
    for _ in range(cases):
        density = rng.uniform(0.0, 1.0, size=2)
        pred = (rng.random((16, 16)) < density[0]).astype(np.uint8)
        gt = (rng.random((16, 16)) < density[1]).astype(np.uint8)
        counts = confusion(pred, gt)
        yield _oracle("confusion_counts", float(counts != _count_oracle(pred, gt)), 0.0)
        report = metrics(counts)
        yield _oracle("dc_ji_identity", abs(report.dc - 2 * report.ji / (1 + report.ji)), 1e-12)


def _dice_oracle(rng: np.random.Generator, cases: int) -> Iterator[CheckResult]:
    y = np.zeros((1, 2, 1, 2))
    y[0, 0, 0, 0] = y[0, 1, 0, 1] = 1.0
    yhat = np.zeros_like(y)
    yhat[0, :, 0, 0] = (0.8, 0.2)
    yhat[0, :, 0, 1] = (0.4, 0.6)
    worked = dice_loss(y, Tensor(yhat)).item()
    yield _oracle("dice_worked_example", abs(worked - (1 - (0.8 / 2.2 + 0.6 / 1.8))), 1e-4)
    yield _oracle("dice_perfect", abs(dice_loss(y, Tensor(y)).item()), 1e-6)

    for _ in range(cases):
        logits = rng.normal(0, 3, size=(2, 2, 4, 4))
        probs = softmax_channels(Tensor(logits))
        labels = one_hot(rng.integers(0, 2, size=(2, 4, 4)), 2, dtype=np.float64)
        value = dice_loss(labels, probs).item()
        yield _oracle("dice_bounds", max(0.0, -value, value - 1.0), 0.0)
        yield _oracle("softmax_sum", float(np.abs(probs.data.sum(axis=1) - 1).max()), 1e-12)


def _adam_oracle(steps: int = 10) -> CheckResult:
    theta = Tensor(np.array([1.0]), requires_grad=True)
    state = AdamState(lr=1e-4)

    ref, m, v = 1.0, 0.0, 0.0
    beta1, beta2, eps, lr = 0.9, 0.999, 1e-8, 1e-4
    error = 0.0
    for t in range(1, steps + 1):
        adam_step({"theta": theta}, {"theta": 2 * theta.data}, state)
        g = 2 * ref
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        ref -= lr * (m / (1 - beta1**t)) / (math.sqrt(v / (1 - beta2**t)) + eps)
        error = max(error, abs(theta.item() - ref))
    return _oracle("adam_trajectory", error, ADAM_ATOL, f"{steps} steps on theta^2")


def oracle_suite(cases: int = 20, seed: int = 0) -> list[CheckResult]:
    """Convolution, receptive-field, metric, Dice and Adam checks against reference computations."""
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []
    with default_dtype(np.float64):
        results += _conv_oracle_cases(rng, cases)
        results += _extent_oracle()
        results += _metric_oracle_cases(rng, 5 * cases)
        results += _dice_oracle(rng, 25 * cases)
        results.append(_adam_oracle())
    return results


def selftest(mode: SelftestMode = "all", cases: int = 20, seed: int = 0) -> SelftestReport:
    """Run the requested suites; the report passes only if every check does."""
    checks: list[CheckResult] = []
    if mode in ("grad", "all"):
        checks += grad_suite(cases, seed)
    if mode in ("oracle", "all"):
        checks += oracle_suite(cases, seed)
    report = SelftestReport(mode=mode, checks=checks)
    for c in report.failures:
        logger.warning(f"{c.suite}/{c.name} failed: {c.value:.3g} {c.detail}")
    logger.info(f"Selftest {mode}: {len(checks) - len(report.failures)}/{len(checks)} checks passed")
    return report
