"""SkinNet building blocks, model assembly and checkpoints."""

from .blocks import (
    BottleneckSpec,
    ConvSpec,
    DenseBlockSpec,
    bottleneck_forward,
    dense_block_forward,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .model import Model, ModelSpec, build_skinnet, forward, layer_graph, parameter_count

__all__ = [
    "BottleneckSpec",
    "ConvSpec",
    "DenseBlockSpec",
    "Model",
    "ModelSpec",
    "bottleneck_forward",
    "build_skinnet",
    "dense_block_forward",
    "forward",
    "layer_graph",
    "load_checkpoint",
    "parameter_count",
    "save_checkpoint",
]
