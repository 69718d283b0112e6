"""
Network building blocks: dense convolution blocks and the multi-rate dilated bottleneck.

Blocks are plain functions over a parameter scope, a mapping from names local to
the block (``conv1/kernel``, ``rate4/bias``, ...) to tensors.
"""
from __future__ import annotations

from collections.abc import Mapping

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..autodiff import Tensor, concat_channels, conv2d, relu
from ..exceptions import ShapeError

ParamScope = Mapping[str, Tensor]

DEFAULT_RATES: tuple[int, ...] = (1, 2, 4, 8, 16, 32)


class ConvSpec(BaseModel):
    """One convolution layer of the layer graph."""

    model_config = ConfigDict(frozen=True)

    name: str
    in_channels: int
    out_channels: int
    kernel: int = 3

    @property
    def parameter_count(self) -> int:
        return self.kernel * self.kernel * self.in_channels * self.out_channels + self.out_channels


class DenseBlockSpec(BaseModel):
    """A stack of 3x3 convs, each fed the concatenation of the block input and all earlier outputs."""

    model_config = ConfigDict(frozen=True)

    in_channels: int = Field(ge=1)
    growth: int = Field(ge=1)
    layers: int = Field(default=2, ge=1)
    kernel: int = 3

    @property
    def out_channels(self) -> int:
        return self.in_channels + self.layers * self.growth

    def layer_in_channels(self, i: int) -> int:
        return self.in_channels + i * self.growth

    def convs(self, prefix: str) -> list[ConvSpec]:
        return [
            ConvSpec(
                name=f"{prefix}/conv{i + 1}",
                in_channels=self.layer_in_channels(i),
                out_channels=self.growth,
                kernel=self.kernel,
            )
            for i in range(self.layers)
        ]


class BottleneckSpec(BaseModel):
    """Parallel 3x3 convolutions at increasing dilation rates, fused by a 1x1 conv."""

    model_config = ConfigDict(frozen=True)

    in_channels: int = Field(ge=1)
    branch_channels: int = Field(ge=1)
    rates: tuple[int, ...] = DEFAULT_RATES
    fuse_kernel: int = 1

    @field_validator("rates")
    @classmethod
    def _check_rates(cls, rates: tuple[int, ...]) -> tuple[int, ...]:
        if not rates:
            raise ValueError("bottleneck needs at least one dilation rate")
        if any(r < 1 for r in rates):
            raise ValueError(f"dilation rates must be >= 1, got {rates}")
        if any(b <= a for a, b in zip(rates, rates[1:], strict=False)):
            raise ValueError(f"dilation rates must be strictly increasing, got {rates}")
        return rates

    def convs(self, prefix: str) -> list[ConvSpec]:
        branches = [
            ConvSpec(name=f"{prefix}/rate{r}", in_channels=self.in_channels, out_channels=self.branch_channels)
            for r in self.rates
        ]
        fuse = ConvSpec(
            name=f"{prefix}/fuse",
            in_channels=self.branch_channels * len(self.rates),
            out_channels=self.branch_channels,
            kernel=self.fuse_kernel,
        )
        return [*branches, fuse]


def conv_block(x: Tensor, params: ParamScope, name: str, dilation: int = 1) -> Tensor:
    """relu(conv(x)) with same padding."""
    try:
        kernel, bias = params[f"{name}/kernel"], params[f"{name}/bias"]
    except KeyError as exc:
        raise ShapeError(f"missing parameter {exc.args[0]!r}") from exc
    return relu(conv2d(x, kernel, bias, dilation=dilation))


def dense_block_forward(x: Tensor, spec: DenseBlockSpec, params: ParamScope) -> Tensor:
    """
    Run a dense block.

    With the default two layers: ``h1 = relu(conv(x))``, ``h2 = relu(conv([x, h1]))``
    and the block returns ``[x, h1, h2]`` concatenated on channels, so the first
    ``in_channels`` output channels are the input itself.
    """
    if x.shape[1] != spec.in_channels:
        raise ShapeError(f"dense block expects {spec.in_channels} channels, got {x.shape[1]}")
    features = [x]
    for i in range(spec.layers):
        layer_in = features[0] if len(features) == 1 else concat_channels(*features)
        features.append(conv_block(layer_in, params, f"conv{i + 1}"))
    return concat_channels(*features)


def bottleneck_forward(x: Tensor, spec: BottleneckSpec, params: ParamScope) -> Tensor:
    """
    Convolve the deepest features at every dilation rate and fuse the branches.

    Each branch is ``relu(conv3x3(x, dilation=r, pad=r))``; the branches are
    concatenated in rate order and reduced back to ``branch_channels`` by
    ``relu(conv1x1(...))``.
    """
    if not spec.rates:
        raise ShapeError("bottleneck needs at least one dilation rate")
    if x.shape[1] != spec.in_channels:
        raise ShapeError(f"bottleneck expects {spec.in_channels} channels, got {x.shape[1]}")
    branches = [conv_block(x, params, f"rate{r}", dilation=r) for r in spec.rates]
    stacked = branches[0] if len(branches) == 1 else concat_channels(*branches)
    return conv_block(stacked, params, "fuse")
