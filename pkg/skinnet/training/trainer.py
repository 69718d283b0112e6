# Licensed under the MIT License

"""
Cross-validated SkinNet training.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Sequence
from functools import partial
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import BaseModel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from ..autodiff import Tape, Tensor, backward
from ..config import TrainConfig, save_train_config
from ..data.augment import augment
from ..data.dataset import load_dataset
from ..data.encoding import one_hot
from ..data.folds import kfold_split
from ..data.models import AugmentationConfig, Sample
from ..data.preprocess import preprocess
from ..data.synthetic import synthetic_dataset
from ..exceptions import DataError, TrainingError
from ..network.checkpoint import save_checkpoint
from ..network.model import Model, build_skinnet, forward
from ..objective.loss import dice_loss
from ..objective.metrics import binarize, confusion, metrics
from ..optim.adam import AdamState, adam_step, model_grads
from ..optim.schedule import schedule_update
from ..reporting.curves import EpochRecord, write_curves_csv, write_curves_html
from ..utils.concurrency import prefetch
from ..utils.io import ensure_dir, write_json


class _DummyProgress:
    """Stand-in for rich's Progress when progress output is disabled."""

    def __enter__(self) -> _DummyProgress:
        return self

    def __exit__(self, *args: object) -> None:
        pass

    def add_task(self, *args: object, **kwargs: object) -> None:
        return None

    def update(self, *args: object, **kwargs: object) -> None:
        pass

    def advance(self, *args: object, **kwargs: object) -> None:
        pass


class FoldResult(BaseModel):
    fold: int
    best_epoch: int | None = None
    best_val_loss: float | None = None
    best_val_dc: float | None = None
    best_val_ji: float | None = None
    checkpoint: Path | None = None
    aborted: bool = False
    error: str | None = None


class TrainSummary(BaseModel):
    folds: list[FoldResult]
    mean_val_dc: float | None
    mean_val_ji: float | None
    curves_csv: Path
    records: list[EpochRecord]


class ValidationScores(BaseModel):
    loss: float
    dc: float
    ji: float


def checkpoint_name(fold: int) -> str:
    return f"fold{fold}_best.sknt"


def load_samples(cfg: TrainConfig) -> list[Sample]:
    """Synthetic or on-disk samples, preprocessed to ``cfg.img_size``."""
    if cfg.synthetic:
        raw = synthetic_dataset(cfg.synthetic, size=cfg.img_size, seed=cfg.seed)
    elif cfg.data_dir is not None:
        raw = load_dataset(cfg.data_dir)
    else:
        raise DataError("no data: pass --data-dir or --synthetic N")
    jobs = [partial(preprocess, s, cfg.img_size, cfg.normalization) for s in raw]
    return list(prefetch(jobs, workers=cfg.workers, queue_size=cfg.queue_size))


def to_batch(samples: Sequence[Sample], classes: int) -> tuple[Tensor, np.ndarray]:
    """(B, 3, S, S) image tensor and (B, K, S, S) one-hot targets."""
    images = np.stack([s.image.transpose(2, 0, 1) for s in samples]).astype(np.float32)
    targets = np.stack([one_hot(s.mask, classes) for s in samples])
    return Tensor(images), targets


def chunks(items: Sequence[Sample], size: int) -> Iterator[list[Sample]]:
    """Consecutive batches; the last one may be short."""
    for start in range(0, len(items), size):
        yield list(items[start : start + size])


def sample_rng(seed: int, fold: int, epoch: int, position: int) -> np.random.Generator:
    return np.random.default_rng([seed, fold, epoch, position])


def _augment_job(s: Sample, cfg: AugmentationConfig, rng: np.random.Generator) -> Sample:
    return augment(s, cfg, rng)


def epoch_samples(
    train: Sequence[Sample], cfg: TrainConfig, fold: int, epoch: int
) -> Iterator[Sample]:
    """Shuffled (and optionally augmented) training samples for one epoch."""
    order = np.random.default_rng([cfg.seed, fold, epoch]).permutation(len(train))
    if not cfg.augment:
        return (train[i] for i in order)
    jobs: list[Callable[[], Sample]] = [
        partial(_augment_job, train[i], cfg.augmentation, sample_rng(cfg.seed, fold, epoch, pos))
        for pos, i in enumerate(order)
    ]
    return prefetch(jobs, workers=cfg.workers, queue_size=cfg.queue_size)


def train_step(model: Model, batch: Sequence[Sample], state: AdamState) -> float:
    """
    One optimizer step on one batch; returns the batch loss.

    Raises:
        TrainingError: the loss is not finite
    """
    x, y = to_batch(batch, model.spec.classes)
    model.zero_grad()
    with Tape() as tape:
        loss = dice_loss(y, forward(model, x))
    value = loss.item()
    if not math.isfinite(value):
        raise TrainingError(f"non-finite training loss {value} at optimizer step {state.t + 1}")
    backward(loss, tape)
    adam_step(model.parameters, model_grads(model.parameters), state)
    return value


def validate(model: Model, samples: Sequence[Sample], batch_size: int) -> ValidationScores:
    """Dice loss over the whole split plus per-image mean DC and JI."""
    loss_sum, dcs, jis = 0.0, [], []
    for batch in chunks(samples, batch_size):
        x, y = to_batch(batch, model.spec.classes)
        probs = forward(model, x)
        loss_sum += dice_loss(y, probs).item() * len(batch)
        for s, pred in zip(batch, binarize(probs), strict=True):
            report = metrics(confusion(pred, s.mask))
            dcs.append(report.dc)
            jis.append(report.ji)
    return ValidationScores(loss=loss_sum / len(samples), dc=float(np.mean(dcs)), ji=float(np.mean(jis)))


def fold_plan(samples: Sequence[Sample], cfg: TrainConfig) -> list[tuple[int, list[Sample], list[Sample]]]:
    """
    (fold, train, validation) triples.

    With ``folds == 1`` cross validation is off: one run trains and validates on
    every sample.
    """
    if cfg.folds == 1:
        return [(0, list(samples), list(samples))]
    by_id = {s.id: s for s in samples}
    split = kfold_split(list(by_id), cfg.folds, cfg.seed)
    chosen = [cfg.fold] if cfg.fold is not None else range(split.k)
    plan = []
    for i in chosen:
        train_ids, val_ids = split.train_val(i)
        plan.append((i, [by_id[sid] for sid in train_ids], [by_id[sid] for sid in val_ids]))
    return plan


def train_fold(
    fold: int,
    train_set: Sequence[Sample],
    val_set: Sequence[Sample],
    cfg: TrainConfig,
    records: list[EpochRecord],
    progress: Progress | _DummyProgress,
) -> FoldResult:
    """
    Train one fold, appending an EpochRecord per epoch and keeping the best-val-loss checkpoint.

    A non-finite loss ends the fold early; records written so far are kept.
    """
    model = build_skinnet(cfg.model_spec(), rng_seed=cfg.seed + fold)
    state = AdamState(lr=cfg.lr)
    sched = cfg.schedule()
    result = FoldResult(fold=fold)
    ckpt_path = cfg.out_dir / checkpoint_name(fold)

    task = progress.add_task(f"fold {fold}", total=cfg.epochs)
    try:
        for epoch in range(1, cfg.epochs + 1):
            losses: list[tuple[float, int]] = []
            batch: list[Sample] = []
            for s in epoch_samples(train_set, cfg, fold, epoch):
                batch.append(s)
                if len(batch) == cfg.batch_size:
                    losses.append((train_step(model, batch, state), len(batch)))
                    batch = []
            if batch:
                losses.append((train_step(model, batch, state), len(batch)))
            train_loss = sum(v * n for v, n in losses) / sum(n for _, n in losses)

            scores = validate(model, val_set, cfg.batch_size)
            if not math.isfinite(scores.loss):
                raise TrainingError(f"non-finite validation loss at epoch {epoch}")
            records.append(
                EpochRecord(
                    fold=fold,
                    epoch=epoch,
                    train_loss=train_loss,
                    val_loss=scores.loss,
                    val_dc=scores.dc,
                    val_ji=scores.ji,
                    lr=state.lr,
                )
            )
            logger.info(
                f"fold {fold} epoch {epoch}: train {train_loss:.4f} val {scores.loss:.4f} "
                f"DC {scores.dc:.4f} JI {scores.ji:.4f} lr {state.lr:g}"
            )

            if result.best_val_loss is None or scores.loss < result.best_val_loss:
                result.best_epoch, result.best_val_loss = epoch, scores.loss
                result.best_val_dc, result.best_val_ji = scores.dc, scores.ji
                result.checkpoint = save_checkpoint(model, ckpt_path)

            state.lr = schedule_update(sched, scores.loss)
            progress.advance(task)
    except TrainingError as e:
        logger.error(f"Fold {fold} aborted: {e}")
        result.aborted, result.error = True, str(e)
    return result


def train(config: TrainConfig, show_progress: bool = True) -> TrainSummary:
    """
    Train one model per fold and write ``curves.csv``, ``fold<i>_best.sknt`` and ``summary.json``.

    Raises:
        DataError: no data, or fewer samples than folds
    """
    ensure_dir(config.out_dir)
    save_train_config(config, config.out_dir / "config.json")
    samples = load_samples(config)
    if not samples:
        raise DataError("dataset is empty")
    plan = fold_plan(samples, config)
    logger.info(f"Training {len(plan)} fold(s) on {len(samples)} samples at {config.img_size}px")

    records: list[EpochRecord] = []
    results: list[FoldResult] = []
    progress = (
        Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
        )
        if show_progress
        else _DummyProgress()
    )
    with progress:
        for fold, train_set, val_set in plan:
            results.append(train_fold(fold, train_set, val_set, config, records, progress))

    curves_csv = write_curves_csv(records, config.out_dir / "curves.csv")
    if config.plot_curves:
        write_curves_html(records, config.out_dir / "curves.html")

    finished = [r for r in results if r.best_val_dc is not None]
    summary = TrainSummary(
        folds=results,
        mean_val_dc=float(np.mean([r.best_val_dc for r in finished])) if finished else None,
        mean_val_ji=float(np.mean([r.best_val_ji for r in finished])) if finished else None,
        curves_csv=curves_csv,
        records=records,
    )
    write_json(config.out_dir / "summary.json", summary.model_dump(mode="json", exclude={"records"}))
    return summary
