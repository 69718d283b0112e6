"""
Seeded synthetic lesions for desk-scale runs: a dark ellipse on textured skin.
"""
from __future__ import annotations

import numpy as np

from .models import Sample

SKIN_RGB = np.array([0.86, 0.66, 0.56], dtype=np.float32)
LESION_RGB = np.array([0.42, 0.27, 0.20], dtype=np.float32)


def synthetic_sample(rng: np.random.Generator, size: int, sid: str) -> Sample:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float32) / size

    texture = np.zeros((size, size), dtype=np.float32)
    for _ in range(3):
        fy, fx = rng.uniform(1.0, 6.0, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        texture += np.sin(2 * np.pi * (fy * yy + fx * xx) + phase).astype(np.float32)
    texture *= 0.02
    tint = rng.uniform(-0.05, 0.05, size=3).astype(np.float32)
    image = SKIN_RGB + tint + texture[..., None]

    cy, cx = rng.uniform(0.3, 0.7, size=2)
    ry, rx = rng.uniform(0.12, 0.3, size=2)
    theta = rng.uniform(0, np.pi)
    dy, dx = yy - cy, xx - cx
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    mask = ((u / rx) ** 2 + (v / ry) ** 2 <= 1.0).astype(np.uint8)

    lesion = LESION_RGB + rng.uniform(-0.06, 0.06, size=3).astype(np.float32)
    image = np.where(mask[..., None] == 1, lesion + 0.5 * texture[..., None], image)
    image = image + rng.normal(0.0, 0.01, size=image.shape).astype(np.float32)
    return Sample(image=np.clip(image, 0.0, 1.0).astype(np.float32), mask=mask, id=sid)


def synthetic_dataset(n: int, size: int = 64, seed: int = 0) -> list[Sample]:
    """``n`` reproducible samples named ``synthetic_0000`` ...; equal arguments give equal data."""
    rng = np.random.default_rng(seed)
    return [synthetic_sample(rng, size, f"synthetic_{i:04d}") for i in range(n)]
