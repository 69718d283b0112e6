"""Loading, preprocessing, augmentation, encoding and fold splitting."""

from .augment import augment
from .dataset import load_dataset
from .encoding import one_hot
from .folds import kfold_split
from .models import AugmentationConfig, FoldSplit, Sample
from .preprocess import preprocess
from .synthetic import synthetic_dataset

__all__ = [
    "AugmentationConfig",
    "FoldSplit",
    "Sample",
    "augment",
    "kfold_split",
    "load_dataset",
    "one_hot",
    "preprocess",
    "synthetic_dataset",
]
