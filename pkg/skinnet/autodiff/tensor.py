"""
Dense tensors and the tape that records operations for reverse-mode differentiation.

A ``Tensor`` wraps one C-contiguous numpy array. Image batches are laid out as
(batch, channel, height, width). Operations record a ``Node`` on the innermost
active ``Tape`` whenever one of their inputs requires a gradient; outside a tape
nothing is recorded (evaluation mode).
"""
from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar, Token
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, DTypeLike, NDArray

from ..exceptions import GradientError

Array = NDArray[np.floating[Any]]
BackwardRule = Callable[[Array], Sequence[Array | None]]

# Context-local: each thread sees its own tape stack and default dtype.
_DEFAULT_DTYPE: ContextVar[np.dtype[Any]] = ContextVar("skinnet_default_dtype", default=np.dtype(np.float32))
_TAPE_STACK: ContextVar[tuple[Tape, ...]] = ContextVar("skinnet_tape_stack", default=())


def get_default_dtype() -> np.dtype[Any]:
    return _DEFAULT_DTYPE.get()


@contextmanager
def default_dtype(dtype: DTypeLike) -> Iterator[None]:
    """
    Temporarily change the dtype new tensors are created with.

    Training runs in float32; gradient checks switch to float64 with
    ``with default_dtype(np.float64): ...``.
    """
    token = _DEFAULT_DTYPE.set(np.dtype(dtype))
    try:
        yield
    finally:
        _DEFAULT_DTYPE.reset(token)


class Tensor:
    """An n-dimensional array with an optional gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_producer")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: str | None = None,
        dtype: DTypeLike | None = None,
    ):
        target = np.dtype(dtype) if dtype is not None else None
        if target is None:
            target = data.dtype if isinstance(data, np.ndarray) and data.dtype.kind == "f" else get_default_dtype()
        self.data: Array = np.ascontiguousarray(np.asarray(data, dtype=target))
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._producer: Node | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> np.dtype[Any]:
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._producer is None

    def item(self) -> float:
        if self.size != 1:
            raise GradientError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: Array) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    def __add__(self, other: Tensor) -> Tensor:
        from .ops import add

        return add(self, other)

    def __mul__(self, other: Tensor) -> Tensor:
        from .ops import mul

        return mul(self, other)

    def sum(self) -> Tensor:
        from .ops import sum_all

        return sum_all(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


@dataclass(eq=False)
class Node:
    """One recorded operation: its inputs, its output and how to push gradients back."""

    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule
    op: str = ""


@dataclass(eq=False)
class Tape:
    """
    Ordered record of operations, replayed in reverse by ``backward``.

    Nodes are appended as operations run, so every node's inputs are leaves or
    outputs of earlier nodes.
    """

    nodes: list[Node] = field(default_factory=list)
    _tokens: list[Token[tuple[Tape, ...]]] = field(default_factory=list, init=False, repr=False)

    def __enter__(self) -> Tape:
        self._tokens.append(_TAPE_STACK.set(_TAPE_STACK.get() + (self,)))
        return self

    def __exit__(self, *exc: object) -> None:
        _TAPE_STACK.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, inputs: Sequence[Tensor], output: Tensor, rule: BackwardRule, op: str = "") -> None:
        node = Node(tuple(inputs), output, rule, op)
        output._producer = node
        output.requires_grad = True
        self.nodes.append(node)

    def produced(self, tensor: Tensor) -> bool:
        return tensor._producer is not None and any(n is tensor._producer for n in self.nodes)


def active_tape() -> Tape | None:
    stack = _TAPE_STACK.get()
    return stack[-1] if stack else None


def record(inputs: Sequence[Tensor], output: Tensor, rule: BackwardRule, op: str) -> Tensor:
    """Attach ``rule`` to ``output`` on the active tape if any input needs a gradient."""
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(inputs, output, rule, op)
    return output


def backward(loss: Tensor, tape: Tape) -> None:
    """
    Accumulate d(loss)/d(leaf) into the ``grad`` of every reachable leaf that requires it.

    Gradients add onto whatever is already stored; callers zero them between steps.

    Raises:
        GradientError: if ``loss`` is not a scalar or was not produced on ``tape``
    """
    if loss.size != 1:
        raise GradientError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not tape.produced(loss):
        raise GradientError("loss was not produced on the given tape")

    pending: dict[int, Array] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        grad_out = pending.pop(id(node.output), None)
        if grad_out is None:
            continue
        grads_in = node.backward(grad_out)
        for tensor, grad in zip(node.inputs, grads_in, strict=True):
            if grad is None or not tensor.requires_grad:
                continue
            if tensor.is_leaf:
                tensor.accumulate_grad(grad)
            elif id(tensor) in pending:
                pending[id(tensor)] = pending[id(tensor)] + grad
            else:
                pending[id(tensor)] = grad
