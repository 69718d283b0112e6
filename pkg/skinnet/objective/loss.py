"""
Dice loss summed over the classes.
"""
from __future__ import annotations

import numpy as np

from ..autodiff import Tensor
from ..autodiff.tensor import Array, record
from ..exceptions import ShapeError

DICE_EPS = 1e-7


def dice_loss(y: Tensor | Array, yhat: Tensor, eps: float = DICE_EPS) -> Tensor:
    """
    ``1 - sum_k (sum_n y_nk * yhat_nk + eps) / (sum_n y_nk + sum_n yhat_nk + eps)``.

    ``n`` runs over every pixel of every image in the batch. Each class term
    tops out at 1/2, so a perfect two-class prediction scores 0. Differentiable
    in ``yhat`` only.

    Args:
        y: One-hot targets, shape (B, K, H, W)
        yhat: Class probabilities, shape (B, K, H, W)
        eps: Smoothing added to numerator and denominator of each class term

    Returns:
        Scalar loss tensor
    """
    target = y.data if isinstance(y, Tensor) else np.asarray(y)
    pred = yhat.data
    if target.shape != pred.shape:
        raise ShapeError(f"target shape {target.shape} != prediction shape {pred.shape}")
    if pred.ndim != 4 or pred.shape[1] < 2:
        raise ShapeError(f"dice loss needs (B, K>=2, H, W) predictions, got {pred.shape}")
    target = target.astype(pred.dtype, copy=False)

    axes = (0, 2, 3)
    inter = (target * pred).sum(axis=axes) + eps
    denom = target.sum(axis=axes) + pred.sum(axis=axes) + eps
    loss = np.asarray(1.0 - (inter / denom).sum(), dtype=pred.dtype)

    def rule(grad: Array) -> tuple[Array]:
        per_class = (
            target / denom.reshape(1, -1, 1, 1) - (inter / denom**2).reshape(1, -1, 1, 1)
        )
        return (-grad.reshape(()) * per_class,)

    return record([yhat], Tensor(loss), rule, "dice_loss")
