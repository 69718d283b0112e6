"""
Binary checkpoint format.

Layout (little-endian)::

    b"SKNT" | u32 version (=1) | u32 tensor count
    per tensor: u32 name length | UTF-8 name | u32 rank | u32 dims... | float32 data

A text sidecar ``<checkpoint>.json`` echoes the ModelSpec so a checkpoint can be
rebuilt without the training config.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import ValidationError

from ..autodiff import Tensor
from ..exceptions import CheckpointError
from ..utils.io import write_bytes_atomic
from .model import Model, ModelSpec, build_skinnet

MAGIC = b"SKNT"
VERSION = 1


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def encode_parameters(parameters: dict[str, Tensor]) -> bytes:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(parameters))]
    for name, tensor in parameters.items():
        raw_name = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw_name)))
        chunks.append(raw_name)
        chunks.append(struct.pack(f"<I{len(tensor.shape)}I", len(tensor.shape), *tensor.shape))
        chunks.append(np.ascontiguousarray(tensor.data, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_parameters(payload: bytes) -> dict[str, np.ndarray]:
    view = memoryview(payload)
    offset = 0

    def take(n: int) -> memoryview:
        nonlocal offset
        if offset + n > len(view):
            raise CheckpointError("checkpoint is truncated")
        chunk = view[offset : offset + n]
        offset += n
        return chunk

    if bytes(take(4)) != MAGIC:
        raise CheckpointError("not a skinnet checkpoint (bad magic)")
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")

    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = bytes(take(name_len)).decode("utf-8")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        n = int(np.prod(dims, dtype=np.int64))
        data = np.frombuffer(take(4 * n), dtype="<f4").astype(np.float32).reshape(dims)
        if name in arrays:
            raise CheckpointError(f"duplicate tensor {name!r} in checkpoint")
        arrays[name] = data
    if offset != len(view):
        raise CheckpointError(f"{len(view) - offset} trailing bytes after the last tensor")
    return arrays


def save_checkpoint(model: Model, path: Path) -> Path:
    """Write the model's parameters and its spec sidecar."""
    write_bytes_atomic(path, encode_parameters(model.parameters))
    write_bytes_atomic(sidecar_path(path), (model.spec.model_dump_json(indent=2) + "\n").encode("utf-8"))
    logger.debug(f"Saved checkpoint {path}")
    return path


def load_spec(path: Path) -> ModelSpec:
    side = sidecar_path(path)
    if not side.exists():
        raise CheckpointError(f"missing spec sidecar {side}")
    try:
        return ModelSpec.model_validate_json(side.read_text())
    except ValidationError as e:
        raise CheckpointError(f"invalid spec sidecar {side}: {e}") from e


def load_checkpoint(path: Path) -> Model:
    """
    Rebuild a model from a checkpoint and its sidecar.

    Raises:
        CheckpointError: unreadable file, bad header, or tensors that do not match the architecture
    """
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    spec = load_spec(path)
    arrays = decode_parameters(payload)

    model = build_skinnet(spec, rng_seed=0, dtype=np.float32)
    if list(arrays) != list(model.parameters):
        raise CheckpointError(f"checkpoint tensors do not match the architecture in {sidecar_path(path)}")
    for name, tensor in model.parameters.items():
        if arrays[name].shape != tensor.shape:
            raise CheckpointError(f"{name}: checkpoint shape {arrays[name].shape} != expected {tensor.shape}")
        tensor.data = np.ascontiguousarray(arrays[name])
    return model
