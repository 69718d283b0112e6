"""Training harness, evaluation, prediction and self-tests."""

from .evaluate import EvaluationResult, evaluate
from .predict import predict
from .selftest import SelftestReport, selftest
from .trainer import EpochRecord, FoldResult, TrainSummary, train

__all__ = [
    "EpochRecord",
    "EvaluationResult",
    "FoldResult",
    "SelftestReport",
    "TrainSummary",
    "evaluate",
    "predict",
    "selftest",
    "train",
]
