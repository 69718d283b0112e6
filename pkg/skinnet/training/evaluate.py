"""
Per-image evaluation of a checkpoint against ground-truth masks.
"""
from __future__ import annotations

from collections.abc import Sequence
from functools import partial
from pathlib import Path

from loguru import logger
from pydantic import BaseModel

from ..data.dataset import load_dataset
from ..data.models import Sample
from ..data.preprocess import Normalization, preprocess
from ..exceptions import CheckpointError, DataError
from ..network.checkpoint import load_checkpoint
from ..network.model import ModelSpec, forward
from ..objective.metrics import METRIC_NAMES, MetricReport, binarize, confusion, metrics
from ..reporting.excel import write_eval_xlsx
from ..utils.concurrency import prefetch
from ..utils.io import write_bytes_atomic
from .trainer import chunks, to_batch

EVAL_CSV = "eval.csv"


class EvaluationResult(BaseModel):
    checkpoint: Path
    per_image: list[tuple[str, MetricReport]]
    aggregate: MetricReport
    csv_path: Path
    xlsx_path: Path | None = None


def eval_csv(rows: Sequence[tuple[str, MetricReport]], aggregate: MetricReport) -> str:
    lines = ["id," + ",".join(METRIC_NAMES)]
    lines += [f"{sid},{report.csv_row()}" for sid, report in rows]
    lines.append(f"mean,{aggregate.csv_row()}")
    return "\n".join(lines) + "\n"


def evaluate(
    checkpoint: Path,
    data: Path | Sequence[Sample],
    out_dir: Path,
    expected_spec: ModelSpec | None = None,
    normalization: Normalization = "standardize",
    batch_size: int = 8,
    xlsx: bool = False,
    workers: int = 2,
) -> EvaluationResult:
    """
    Score a checkpoint image by image and write ``eval.csv``.

    Images and masks are brought to the checkpoint's input size first. The
    aggregate is the mean of the per-image metrics.

    Args:
        checkpoint: ``.sknt`` file with its spec sidecar
        data: ISIC-layout directory or already loaded samples
        out_dir: Where ``eval.csv`` (and ``eval.xlsx``) go
        expected_spec: Architecture the caller's config describes, if any
        normalization: Intensity normalization applied before the forward pass
        batch_size: Images per forward pass
        xlsx: Also write an Excel workbook

    Raises:
        CheckpointError: the checkpoint's architecture differs from ``expected_spec``
        DataError: no samples to evaluate
    """
    model = load_checkpoint(checkpoint)
    if expected_spec is not None and expected_spec != model.spec:
        raise CheckpointError(
            f"checkpoint {checkpoint} was built for {model.spec.model_dump()}, config describes "
            f"{expected_spec.model_dump()}"
        )

    raw = load_dataset(data) if isinstance(data, Path) else list(data)
    if not raw:
        raise DataError("evaluation set is empty")
    size = model.spec.input_size
    jobs = [partial(preprocess, s, size, normalization) for s in raw]
    samples = list(prefetch(jobs, workers=workers))

    rows: list[tuple[str, MetricReport]] = []
    for batch in chunks(samples, batch_size):
        x, _ = to_batch(batch, model.spec.classes)
        for s, pred in zip(batch, binarize(forward(model, x)), strict=True):
            rows.append((s.id, metrics(confusion(pred, s.mask))))

    aggregate = MetricReport.mean([r for _, r in rows])
    csv_path = out_dir / EVAL_CSV
    write_bytes_atomic(csv_path, eval_csv(rows, aggregate).encode("utf-8"))
    logger.info(f"Evaluated {len(rows)} images: DC {aggregate.dc:.4f} JI {aggregate.ji:.4f}")

    xlsx_path = write_eval_xlsx(checkpoint, rows, aggregate, out_dir / "eval.xlsx") if xlsx else None
    return EvaluationResult(
        checkpoint=checkpoint, per_image=rows, aggregate=aggregate, csv_path=csv_path, xlsx_path=xlsx_path
    )
