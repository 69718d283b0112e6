"""
Learning-curve outputs: a byte-stable CSV and an interactive plot.
"""
from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import pandas as pd
import plotly.graph_objects as go
from plotly.subplots import make_subplots
from pydantic import BaseModel

from ..utils.io import write_bytes_atomic

CURVE_COLUMNS = ["fold", "epoch", "train_loss", "val_loss", "val_dc", "val_ji", "lr"]


class EpochRecord(BaseModel):
    fold: int
    epoch: int
    train_loss: float
    val_loss: float
    val_dc: float
    val_ji: float
    lr: float


def curves_frame(records: Sequence[EpochRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=CURVE_COLUMNS)


def write_curves_csv(records: Sequence[EpochRecord], path: Path) -> Path:
    """Write ``fold,epoch,train_loss,val_loss,val_dc,val_ji,lr`` rows; same records, same bytes."""
    text = curves_frame(records).to_csv(index=False, float_format="%.8g", lineterminator="\n")
    write_bytes_atomic(path, text.encode("utf-8"))
    return path


def write_curves_html(records: Sequence[EpochRecord], path: Path) -> Path | None:
    """
    Plot fold-averaged loss (left) and validation DC/JI (right) per epoch.

    Returns None when there is nothing to plot.
    """
    df = curves_frame(records)
    if df.empty:
        return None
    mean = df.groupby("epoch", sort=True)[["train_loss", "val_loss", "val_dc", "val_ji"]].mean()

    fig = make_subplots(rows=1, cols=2, subplot_titles=("Dice loss", "Validation overlap"))
    fig.add_trace(go.Scatter(x=mean.index, y=mean["train_loss"], name="train loss"), row=1, col=1)
    fig.add_trace(go.Scatter(x=mean.index, y=mean["val_loss"], name="val loss"), row=1, col=1)
    fig.add_trace(go.Scatter(x=mean.index, y=mean["val_dc"], name="val DC"), row=1, col=2)
    fig.add_trace(go.Scatter(x=mean.index, y=mean["val_ji"], name="val JI"), row=1, col=2)
    folds = df["fold"].nunique()
    fig.update_layout(title=f"Training curves (mean over {folds} fold{'s' if folds != 1 else ''})")
    fig.update_xaxes(title_text="epoch")

    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(path, include_plotlyjs="cdn")
    return path
