from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..exceptions import DataError


def one_hot(mask: ArrayLike, k: int = 2, dtype: np.dtype | type = np.float32) -> NDArray[np.floating]:
    """
    Integer labels (..., H, W) -> indicators (..., K, H, W).

    Channel 0 is background and channel 1 lesion for binary masks; every pixel's
    channels sum to 1. A (B, H, W) batch of masks gives (B, K, H, W).
    """
    labels = np.asarray(mask)
    if k < 2:
        raise DataError(f"one_hot needs k >= 2, got {k}")
    if labels.ndim < 2:
        raise DataError(f"one_hot needs at least (H, W) labels, got shape {labels.shape}")
    if not np.isin(labels, np.arange(k)).all():
        raise DataError(f"mask values must be integers in [0, {k}), got {np.unique(labels)[:10]}")
    hot = labels.astype(np.int64)[..., None] == np.arange(k)
    return np.ascontiguousarray(np.moveaxis(hot, -1, -3), dtype=dtype)
