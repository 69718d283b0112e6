"""
Seeded k-fold splitting.
"""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..exceptions import DataError
from .models import FoldSplit


def kfold_split(ids: Sequence[str], k: int = 5, seed: int = 0) -> FoldSplit:
    """
    Shuffle ``ids`` with a seeded permutation and deal them round-robin into ``k`` folds.

    Fold sizes differ by at most one; the first ``len(ids) % k`` folds get the extra id.

    Raises:
        DataError: ``k < 2``, fewer ids than folds, or duplicate ids
    """
    if k < 2:
        raise DataError(f"k-fold split needs k >= 2, got {k}")
    if len(ids) < k:
        raise DataError(f"cannot split {len(ids)} samples into {k} folds")
    if len(set(ids)) != len(ids):
        raise DataError("sample ids must be unique")
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    return FoldSplit(folds=[shuffled[i::k] for i in range(k)], seed=seed)
