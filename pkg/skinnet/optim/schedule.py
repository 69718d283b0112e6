"""
Reduce-on-plateau learning-rate schedule driven by validation loss.
"""
from __future__ import annotations

import math

from loguru import logger
from pydantic import BaseModel, Field, model_validator


class PlateauSchedule(BaseModel):
    """
    Halve the learning rate after ``patience`` epochs without improvement.

    The first observed loss sets the baseline; an epoch improves on it only if it
    beats the best loss by more than ``threshold``.
    """

    lr: float = Field(default=1e-4, gt=0)
    factor: float = Field(default=0.5, gt=0, lt=1)
    patience: int = Field(default=5, ge=1)
    min_lr: float = Field(default=1e-6, ge=0)
    threshold: float = Field(default=1e-4, ge=0)
    best: float = math.inf
    bad_epochs: int = 0

    @model_validator(mode="after")
    def _check_floor(self) -> PlateauSchedule:
        if self.lr < self.min_lr:
            raise ValueError(f"lr {self.lr:g} is below min_lr {self.min_lr:g}")
        return self


def schedule_update(sched: PlateauSchedule, epoch_val_loss: float) -> float:
    """Feed one epoch's validation loss; returns the learning rate for the next epoch."""
    if epoch_val_loss < sched.best - sched.threshold:
        sched.best = epoch_val_loss
        sched.bad_epochs = 0
        return sched.lr

    sched.bad_epochs += 1
    if sched.bad_epochs >= sched.patience:
        new_lr = max(sched.lr * sched.factor, sched.min_lr)
        if new_lr < sched.lr:
            logger.info(f"Validation loss plateaued for {sched.bad_epochs} epochs; lr {sched.lr:g} -> {new_lr:g}")
        sched.lr = new_lr
        sched.bad_epochs = 0
    return sched.lr
