# Licensed under the MIT License

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv
from loguru import logger
from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .data.models import AugmentationConfig
from .exceptions import ConfigError
from .network.model import ModelSpec
from .optim.schedule import PlateauSchedule
from .utils.io import write_bytes_atomic

# Load .env file from the working directory
load_dotenv()

APP_NAME = "skinnet"

# Desk-sized defaults; full scale is --img-size 512 with base_growth 32.
DESK_IMG_SIZE = 64
DESK_BASE_GROWTH = 8


class TrainConfig(BaseSettings):
    """
    Every hyperparameter, path and seed of one training run.

    Values come from (highest first) CLI flags, a flat JSON file, ``SKINNET_*``
    environment variables and the defaults below.
    """

    model_config = SettingsConfigDict(env_prefix="SKINNET_", extra="forbid")

    data_dir: Path | None = None
    out_dir: Path = Path("runs")
    synthetic: int | None = Field(default=None, ge=1)

    img_size: int = Field(default=DESK_IMG_SIZE, ge=16)
    base_growth: int = Field(default=DESK_BASE_GROWTH, ge=1)
    depth: int = Field(default=4, ge=1)
    classes: int = Field(default=2, ge=2)

    batch_size: int = Field(default=8, ge=1)
    epochs: int = Field(default=100, ge=1)
    lr: float = Field(default=1e-4, gt=0)
    folds: int = Field(default=5, ge=1)
    fold: int | None = Field(default=None, ge=0)
    seed: int = 0

    lr_factor: float = Field(default=0.5, gt=0, lt=1)
    lr_patience: int = Field(default=5, ge=1)
    min_lr: float = Field(default=1e-6, ge=0)
    lr_threshold: float = Field(default=1e-4, ge=0)

    augment: bool = True
    augmentation: AugmentationConfig = Field(default_factory=AugmentationConfig)
    normalization: Literal["standardize", "minmax", "none"] = "standardize"

    workers: int = Field(default=2, ge=0)
    queue_size: int = Field(default=8, ge=1)
    plot_curves: bool = True
    log_level: str = "INFO"

    @model_validator(mode="after")
    def _check_consistency(self) -> TrainConfig:
        if self.img_size % (2**self.depth):
            raise ValueError(f"img_size {self.img_size} is not divisible by 2^depth = {2**self.depth}")
        if self.fold is not None and self.folds > 1 and self.fold >= self.folds:
            raise ValueError(f"fold {self.fold} out of range for {self.folds} folds")
        if self.lr < self.min_lr:
            raise ValueError(f"lr {self.lr:g} is below min_lr {self.min_lr:g}")
        return self

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            depth=self.depth,
            base_growth=self.base_growth,
            classes=self.classes,
            input_size=self.img_size,
        )

    def schedule(self) -> PlateauSchedule:
        return PlateauSchedule(
            lr=self.lr,
            factor=self.lr_factor,
            patience=self.lr_patience,
            min_lr=self.min_lr,
            threshold=self.lr_threshold,
        )


def load_train_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> TrainConfig:
    """
    Resolve a TrainConfig from an optional JSON file plus CLI overrides.

    ``None`` overrides are ignored so unset CLI flags fall through to the file,
    the environment and the defaults.

    Raises:
        ConfigError: unreadable or invalid JSON, or values that fail validation
    """
    values: dict[str, Any] = {}
    if path is not None:
        try:
            values = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(values, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        cfg = TrainConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"Resolved config: {cfg.model_dump_json()}")
    return cfg


def save_train_config(cfg: TrainConfig, path: Path) -> None:
    """Write the resolved config atomically."""
    write_bytes_atomic(path, (cfg.model_dump_json(indent=2) + "\n").encode("utf-8"))
