"""
Random paired augmentation: rotation, flips, color shift, translation and scaling.

Geometric transforms move image and mask together through the same nearest-
neighbor warp with zero fill, so an image that replicates its mask still
replicates it afterwards. Color shift touches the image only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from PIL import Image

from .models import AugmentationConfig, Sample


@dataclass(frozen=True)
class AugmentationDraw:
    """One set of random transform parameters."""

    angle_deg: float
    hflip: bool
    vflip: bool
    color_shift: tuple[float, float, float]
    translate: tuple[float, float]
    scale: float

    @property
    def is_geometric_identity(self) -> bool:
        return self.angle_deg == 0 and self.scale == 1 and self.translate == (0, 0)


def draw(cfg: AugmentationConfig, rng: np.random.Generator) -> AugmentationDraw:
    """Draw every transform's parameters; the number of draws does not depend on cfg."""
    angle = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg)
    do_h = rng.random() < cfg.hflip
    do_v = rng.random() < cfg.vflip
    shift = rng.uniform(-cfg.color_shift, cfg.color_shift, size=3)
    tx, ty = rng.uniform(-cfg.translation, cfg.translation, size=2)
    scale = rng.uniform(cfg.scale[0], cfg.scale[1])
    return AugmentationDraw(
        angle_deg=float(angle),
        hflip=bool(do_h),
        vflip=bool(do_v),
        color_shift=(float(shift[0]), float(shift[1]), float(shift[2])),
        translate=(float(tx), float(ty)),
        scale=float(scale),
    )


def hflip(s: Sample) -> Sample:
    return Sample(image=s.image[:, ::-1].copy(), mask=s.mask[:, ::-1].copy(), id=s.id)


def vflip(s: Sample) -> Sample:
    return Sample(image=s.image[::-1].copy(), mask=s.mask[::-1].copy(), id=s.id)


def inverse_affine(
    width: int, height: int, angle_deg: float, scale: float, translate: tuple[float, float]
) -> tuple[float, float, float, float, float, float]:
    """
    Output-to-input coefficients for a rotation and scaling about the image
    center followed by a translation (given as fractions of width/height).
    """
    theta = math.radians(angle_deg)
    cos, sin = math.cos(theta), math.sin(theta)
    cx, cy = width / 2.0, height / 2.0
    ox, oy = cx + translate[0] * width, cy + translate[1] * height
    a, b = cos / scale, sin / scale
    d, e = -sin / scale, cos / scale
    return a, b, cx - a * ox - b * oy, d, e, cy - d * ox - e * oy


def warp(plane: NDArray[np.generic], coeffs: tuple[float, ...]) -> NDArray[np.generic]:
    """Nearest-neighbor affine warp of one 2-D plane, zero outside the source."""
    im = Image.fromarray(np.ascontiguousarray(plane))
    out = im.transform(im.size, Image.Transform.AFFINE, coeffs, resample=Image.Resampling.NEAREST, fillcolor=0)
    return np.asarray(out).astype(plane.dtype)


def apply(s: Sample, params: AugmentationDraw) -> Sample:
    out = s
    if params.hflip:
        out = hflip(out)
    if params.vflip:
        out = vflip(out)

    image, mask = out.image, out.mask
    if not params.is_geometric_identity:
        h, w = mask.shape
        coeffs = inverse_affine(w, h, params.angle_deg, params.scale, params.translate)
        image = np.stack([warp(image[..., c].astype(np.float32), coeffs) for c in range(3)], axis=-1)
        mask = warp(mask.astype(np.uint8), coeffs)

    if any(params.color_shift):
        image = np.clip(image + np.asarray(params.color_shift, dtype=np.float32), 0.0, 1.0)

    return Sample(image=image.astype(np.float32), mask=mask.astype(np.uint8), id=s.id)


def augment(s: Sample, cfg: AugmentationConfig, rng: np.random.Generator) -> Sample:
    """Apply one random draw of every transform; a pure function of (s, cfg, rng state)."""
    return apply(s, draw(cfg, rng))
