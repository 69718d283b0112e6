"""
SkinNet assembly: dense-block encoder, dilated bottleneck, dense-block decoder
with skip connections and a softmax head.
"""
from __future__ import annotations

from collections.abc import Iterator

import numpy as np
from numpy.typing import DTypeLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..autodiff import (
    Tensor,
    active_tape,
    concat_channels,
    conv2d,
    get_default_dtype,
    max_pool2d,
    softmax_channels,
    upsample2d_nearest,
)
from ..exceptions import ShapeError
from .blocks import (
    DEFAULT_RATES,
    BottleneckSpec,
    ConvSpec,
    DenseBlockSpec,
    ParamScope,
    bottleneck_forward,
    conv_block,
    dense_block_forward,
)


class ModelSpec(BaseModel):
    """Architecture hyperparameters; everything else about the model derives from these."""

    model_config = ConfigDict(frozen=True)

    depth: int = Field(default=4, ge=1)
    base_growth: int = Field(default=8, ge=1)
    in_channels: int = Field(default=3, ge=1)
    classes: int = Field(default=2, ge=2)
    input_size: int = Field(default=512, ge=1)
    rates: tuple[int, ...] = DEFAULT_RATES

    @model_validator(mode="after")
    def _check_size(self) -> ModelSpec:
        if self.input_size % (2**self.depth):
            raise ValueError(f"input_size {self.input_size} is not divisible by 2^depth = {2**self.depth}")
        return self

    def growth(self, level: int) -> int:
        return self.base_growth * 2**level

    def encoder_block(self, level: int) -> DenseBlockSpec:
        in_ch = self.in_channels
        for lower in range(level):
            in_ch += 2 * self.growth(lower)
        return DenseBlockSpec(in_channels=in_ch, growth=self.growth(level))

    def bottleneck(self) -> BottleneckSpec:
        return BottleneckSpec(
            in_channels=self.encoder_block(self.depth - 1).out_channels,
            branch_channels=self.growth(self.depth),
            rates=self.rates,
        )

    def up_channels(self, level: int) -> int:
        return 2 * self.growth(level)

    def decoder_block(self, level: int) -> DenseBlockSpec:
        skip = self.encoder_block(level).out_channels
        return DenseBlockSpec(in_channels=self.up_channels(level) + skip, growth=self.growth(level))

    def decoder_input_channels(self, level: int) -> int:
        if level == self.depth - 1:
            return self.bottleneck().branch_channels
        return self.decoder_block(level + 1).out_channels


def layer_graph(spec: ModelSpec) -> list[ConvSpec]:
    """Every convolution of the network, in execution order."""
    layers: list[ConvSpec] = []
    for level in range(spec.depth):
        layers += spec.encoder_block(level).convs(f"enc{level}/dense")
    layers += spec.bottleneck().convs("bottleneck")
    for level in reversed(range(spec.depth)):
        layers.append(
            ConvSpec(
                name=f"dec{level}/up",
                in_channels=spec.decoder_input_channels(level),
                out_channels=spec.up_channels(level),
            )
        )
        layers += spec.decoder_block(level).convs(f"dec{level}/dense")
    layers.append(
        ConvSpec(name="head", in_channels=spec.decoder_block(0).out_channels, out_channels=spec.classes, kernel=1)
    )
    return layers


class Model:
    """A ModelSpec plus its named parameter tensors (insertion order = layer order)."""

    def __init__(self, spec: ModelSpec, parameters: dict[str, Tensor]):
        self.spec = spec
        self.parameters = parameters

    def scope(self, prefix: str) -> ParamScope:
        """Parameters under ``prefix/``, keyed by the rest of their name."""
        head = prefix + "/"
        return {name[len(head):]: t for name, t in self.parameters.items() if name.startswith(head)}

    def named_parameters(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self.parameters.items())

    def zero_grad(self) -> None:
        for t in self.parameters.values():
            t.zero_grad()

    def __repr__(self) -> str:
        return f"Model(spec={self.spec!r}, tensors={len(self.parameters)}, parameters={parameter_count(self)})"


def build_skinnet(spec: ModelSpec, rng_seed: int, dtype: DTypeLike | None = None) -> Model:
    """
    Build a SkinNet with He-uniform kernels and zero biases.

    Kernels are drawn uniformly from ``[-sqrt(6 / fan_in), sqrt(6 / fan_in)]`` with
    ``fan_in = k * k * in_channels``, layer by layer in ``layer_graph`` order, from a
    generator seeded with ``rng_seed``; equal (spec, seed) give bitwise-equal parameters.
    """
    target = np.dtype(dtype) if dtype is not None else get_default_dtype()
    rng = np.random.default_rng(rng_seed)
    parameters: dict[str, Tensor] = {}
    for layer in layer_graph(spec):
        fan_in = layer.kernel * layer.kernel * layer.in_channels
        bound = np.sqrt(6.0 / fan_in)
        shape = (layer.out_channels, layer.in_channels, layer.kernel, layer.kernel)
        kernel = rng.uniform(-bound, bound, size=shape)
        parameters[f"{layer.name}/kernel"] = Tensor(
            kernel, requires_grad=True, name=f"{layer.name}/kernel", dtype=target
        )
        parameters[f"{layer.name}/bias"] = Tensor(
            np.zeros(layer.out_channels), requires_grad=True, name=f"{layer.name}/bias", dtype=target
        )
    return Model(spec, parameters)


def forward(model: Model, batch: Tensor) -> Tensor:
    """
    Per-pixel class probabilities for a (B, in_channels, S, S) batch.

    While a tape is active (training) S must equal the model's input size; in
    evaluation any S divisible by 2^depth is accepted.
    """
    spec = model.spec
    if batch.data.ndim != 4 or batch.shape[1] != spec.in_channels:
        raise ShapeError(f"expected (B, {spec.in_channels}, S, S) input, got {batch.shape}")
    size = batch.shape[2]
    if batch.shape[3] != size:
        raise ShapeError(f"expected square input, got {batch.shape[2]}x{batch.shape[3]}")
    if size % (2**spec.depth):
        raise ShapeError(f"input size {size} is not divisible by 2^depth = {2**spec.depth}")
    if active_tape() is not None and size != spec.input_size:
        raise ShapeError(f"training input size {size} differs from the model's input size {spec.input_size}")

    skips: list[Tensor] = []
    h = batch
    for level in range(spec.depth):
        h = dense_block_forward(h, spec.encoder_block(level), model.scope(f"enc{level}/dense"))
        skips.append(h)
        h = max_pool2d(h, 2)

    h = bottleneck_forward(h, spec.bottleneck(), model.scope("bottleneck"))

    for level in reversed(range(spec.depth)):
        h = conv_block(upsample2d_nearest(h, 2), model.parameters, f"dec{level}/up")
        h = concat_channels(h, skips[level])
        h = dense_block_forward(h, spec.decoder_block(level), model.scope(f"dec{level}/dense"))

    logits = conv2d(h, model.parameters["head/kernel"], model.parameters["head/bias"])
    return softmax_channels(logits)


def parameter_count(model: Model) -> int:
    """Total number of scalar parameters."""
    return sum(t.size for t in model.parameters.values())
