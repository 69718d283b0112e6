"""
Resizing and intensity normalization.
"""
from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import NDArray
from PIL import Image

from ..exceptions import DataError
from .models import Sample

Normalization = Literal["standardize", "minmax", "none"]

MIN_SIZE = 16
VARIANCE_FLOOR = 1e-6


def resize_image(image: NDArray[np.float32], size: int) -> NDArray[np.float32]:
    """Bilinear resize of each channel to ``size`` x ``size``."""
    if image.shape[:2] == (size, size):
        return image.astype(np.float32, copy=True)
    planes = [
        np.asarray(Image.fromarray(np.ascontiguousarray(image[..., c], dtype=np.float32)).resize(
            (size, size), Image.Resampling.BILINEAR
        ))
        for c in range(image.shape[2])
    ]
    return np.stack(planes, axis=-1).astype(np.float32)


def resize_mask(mask: NDArray[np.uint8], size: int) -> NDArray[np.uint8]:
    """Nearest-neighbor resize; the result stays binary."""
    if mask.shape == (size, size):
        return mask.copy()
    return np.asarray(Image.fromarray(mask.astype(np.uint8)).resize((size, size), Image.Resampling.NEAREST))


def _minmax(x: NDArray[np.float32]) -> NDArray[np.float32]:
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def normalize(image: NDArray[np.float32], mode: Normalization = "standardize") -> NDArray[np.float32]:
    """
    Map an image into [0, 1].

    ``standardize`` z-scores each channel (variance floored at 1e-6) and then
    min-max scales the whole image; ``minmax`` only min-max scales; ``none``
    clips.
    """
    if mode == "standardize":
        mean = image.mean(axis=(0, 1), keepdims=True)
        var = np.maximum(image.var(axis=(0, 1), keepdims=True), VARIANCE_FLOOR)
        out = _minmax((image - mean) / np.sqrt(var))
    elif mode == "minmax":
        out = _minmax(image)
    elif mode == "none":
        out = np.clip(image, 0.0, 1.0)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return out.astype(np.float32)


def preprocess(s: Sample, size: int, normalization: Normalization = "standardize") -> Sample:
    """Resize to ``size`` x ``size`` (image bilinear, mask nearest) and normalize the image."""
    if size < MIN_SIZE:
        raise DataError(f"preprocess size must be >= {MIN_SIZE}, got {size}")
    image = normalize(resize_image(s.image, size), normalization)
    return Sample(image=image, mask=resize_mask(s.mask, size), id=s.id)
