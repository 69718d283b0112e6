"""Dice loss and the five segmentation metrics."""

from .loss import DICE_EPS, dice_loss
from .metrics import ConfusionCounts, MetricReport, binarize, confusion, metrics

__all__ = [
    "DICE_EPS",
    "ConfusionCounts",
    "MetricReport",
    "binarize",
    "confusion",
    "dice_loss",
    "metrics",
]
