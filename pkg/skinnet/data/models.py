"""
Data models for samples, augmentation settings and cross-validation folds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, field_validator

from ..exceptions import DataError


@dataclass(frozen=True, eq=False)
class Sample:
    """
    One image (H, W, 3) float32 in [0, 1] and its binary mask (H, W) uint8 in {0, 1}.
    """

    image: NDArray[np.float32]
    mask: NDArray[np.uint8]
    id: str

    def __post_init__(self) -> None:
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise DataError(f"{self.id}: image must be (H, W, 3), got {self.image.shape}")
        if self.mask.shape != self.image.shape[:2]:
            raise DataError(f"{self.id}: mask {self.mask.shape} does not match image {self.image.shape[:2]}")
        if not np.isin(self.mask, (0, 1)).all():
            raise DataError(f"{self.id}: mask is not binary")


class AugmentationConfig(BaseModel):
    """Random transform ranges; a zero range or probability disables that transform."""

    rotation_deg: float = Field(default=25.0, ge=0, le=180)
    hflip: float = Field(default=0.5, ge=0, le=1)
    vflip: float = Field(default=0.5, ge=0, le=1)
    color_shift: float = Field(default=0.1, ge=0, le=1)
    translation: float = Field(default=0.1, ge=0, le=1)
    scale: tuple[float, float] = (0.9, 1.1)
    seed: int = 0

    @field_validator("scale")
    @classmethod
    def _check_scale(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if not (0 < lo <= hi) or not np.isfinite(hi):
            raise ValueError(f"scale range must satisfy 0 < lo <= hi < inf, got {value}")
        return value

    @classmethod
    def disabled(cls, **overrides: Any) -> AugmentationConfig:
        base: dict[str, Any] = dict(rotation_deg=0, hflip=0, vflip=0, color_shift=0, translation=0, scale=(1, 1))
        return cls(**{**base, **overrides})


class FoldSplit(BaseModel):
    """``k`` disjoint lists of sample ids; fold ``i`` validates run ``i``."""

    folds: list[list[str]]
    seed: int = 0

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_val(self, i: int) -> tuple[list[str], list[str]]:
        if not 0 <= i < self.k:
            raise DataError(f"fold {i} out of range for {self.k} folds")
        train = [sid for j, fold in enumerate(self.folds) if j != i for sid in fold]
        return train, list(self.folds[i])
