"""
Segmentation metrics from hard masks: accuracy, Dice, Jaccard, sensitivity, specificity.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field

from ..autodiff import Tensor
from ..exceptions import DataError, ShapeError

METRIC_NAMES = ("ac", "dc", "ji", "se", "sp")


class ConfusionCounts(BaseModel):
    """Pixel counts with lesion as the positive class."""

    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MetricReport(BaseModel):
    ac: float = Field(ge=0.0, le=1.0)
    dc: float = Field(ge=0.0, le=1.0)
    ji: float = Field(ge=0.0, le=1.0)
    se: float = Field(ge=0.0, le=1.0)
    sp: float = Field(ge=0.0, le=1.0)

    def csv_row(self) -> str:
        """``ac,dc,ji,se,sp`` with 4 decimal places."""
        return ",".join(f"{getattr(self, name):.4f}" for name in METRIC_NAMES)

    @classmethod
    def mean(cls, reports: list[MetricReport]) -> MetricReport:
        if not reports:
            raise DataError("cannot average an empty list of metric reports")
        return cls(**{name: float(np.mean([getattr(r, name) for r in reports])) for name in METRIC_NAMES})


def _as_binary(mask: ArrayLike, what: str) -> NDArray[np.bool_]:
    arr = np.asarray(mask)
    if not np.isin(arr, (0, 1)).all():
        raise DataError(f"{what} mask is not binary")
    return arr.astype(bool)


def confusion(pred_mask: ArrayLike, gt_mask: ArrayLike) -> ConfusionCounts:
    """Count pixelwise agreement between a predicted and a ground-truth mask."""
    pred = _as_binary(pred_mask, "predicted")
    gt = _as_binary(gt_mask, "ground-truth")
    if pred.shape != gt.shape:
        raise ShapeError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    return ConfusionCounts(
        tp=int(np.count_nonzero(pred & gt)),
        fp=int(np.count_nonzero(pred & ~gt)),
        tn=int(np.count_nonzero(~pred & ~gt)),
        fn=int(np.count_nonzero(~pred & gt)),
    )


def _ratio(num: int, den: int, agrees: bool) -> float:
    # 0/0: the reference set is empty; score 1 when the prediction is empty too.
    if den == 0:
        return 1.0 if agrees else 0.0
    return num / den


def metrics(c: ConfusionCounts) -> MetricReport:
    """
    AC, DC, JI, SE and SP from confusion counts.

    Raises:
        DataError: all counts are zero
    """
    if c.total == 0:
        raise DataError("cannot compute metrics from empty confusion counts")
    return MetricReport(
        ac=(c.tp + c.tn) / c.total,
        dc=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, agrees=True),
        ji=_ratio(c.tp, c.tp + c.fp + c.fn, agrees=True),
        se=_ratio(c.tp, c.tp + c.fn, agrees=c.fp == 0),
        sp=_ratio(c.tn, c.tn + c.fp, agrees=c.fn == 0),
    )


def binarize(yhat: Tensor | NDArray[np.floating], threshold: float = 0.5) -> NDArray[np.uint8]:
    """Lesion masks (B, H, W) from (B, 2, H, W) probabilities: lesion channel >= threshold."""
    probs = yhat.data if isinstance(yhat, Tensor) else np.asarray(yhat)
    if probs.ndim != 4 or probs.shape[1] != 2:
        raise ShapeError(f"binarize expects (B, 2, H, W) probabilities, got {probs.shape}")
    return (probs[:, 1] >= threshold).astype(np.uint8)
