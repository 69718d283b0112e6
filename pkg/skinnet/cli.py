# Licensed under the MIT License

from __future__ import annotations

import platform
from pathlib import Path
from typing import Any

import numpy as np
import PIL
import typer
from rich.console import Console
from rich.table import Table

from .config import load_train_config
from .data.dataset import load_dataset
from .data.folds import kfold_split
from .data.models import Sample
from .data.preprocess import Normalization
from .data.synthetic import synthetic_dataset
from .exceptions import SkinNetError
from .network.checkpoint import load_spec
from .objective.metrics import METRIC_NAMES
from .training.evaluate import evaluate
from .training.predict import predict
from .training.selftest import SelftestMode, oracle_suite, selftest
from .training.trainer import train
from .utils.io import ensure_dir, write_json
from .utils.logging import setup_logging
from .version import __version__

app = typer.Typer(help="SkinNet: skin lesion segmentation from scratch on numpy")
console = Console()


def _fail(e: SkinNetError) -> typer.Exit:
    console.print(f"[red]{type(e).__name__}:[/] {e}")
    return typer.Exit(code=1)


def _require(path: Path | None, what: str) -> None:
    if path is not None and not path.exists():
        console.print(f"[red]Missing {what}:[/] {path}")
        raise typer.Exit(code=2)


@app.callback()
def main(
    log_level: str = typer.Option("INFO", "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    log_file: Path = typer.Option(None, "--log-file", help="Also log to this (rotated) file"),
):
    """
    Train, evaluate and run SkinNet segmentation models.
    """
    setup_logging(level=log_level.upper(), log_file=log_file)


@app.command("train")
def train_cmd(
    config: Path = typer.Option(None, "--config", "-c", help="Flat JSON file with TrainConfig keys"),
    data_dir: Path = typer.Option(None, "--data-dir", "-d", help="ISIC-layout folder of <id>.png + <id>_segmentation.png"),
    out_dir: Path = typer.Option(None, "--out-dir", "-o", help="Run folder for checkpoints and curves"),
    synthetic: int = typer.Option(None, "--synthetic", help="Train on N generated samples instead of --data-dir"),
    fold: int = typer.Option(None, "--fold", help="Run only this fold"),
    folds: int = typer.Option(None, "--folds", help="Number of cross-validation folds (1 disables CV)"),
    seed: int = typer.Option(None, "--seed", help="Seed for splits, initialization and augmentation"),
    img_size: int = typer.Option(None, "--img-size", help="Square training resolution"),
    epochs: int = typer.Option(None, "--epochs", help="Epochs per fold"),
    batch_size: int = typer.Option(None, "--batch-size", help="Samples per optimizer step"),
    augment: bool = typer.Option(None, "--augment/--no-augment", help="Random augmentation of training samples"),
    no_progress: bool = typer.Option(False, "--no-progress", help="Disable progress bar"),
):
    """
    Train one model per cross-validation fold. Writes fold<i>_best.sknt, curves.csv and summary.json.
    """
    _require(config, "config file")
    _require(data_dir, "data directory")
    overrides: dict[str, Any] = dict(
        data_dir=data_dir,
        out_dir=out_dir,
        synthetic=synthetic,
        fold=fold,
        folds=folds,
        seed=seed,
        img_size=img_size,
        epochs=epochs,
        batch_size=batch_size,
        augment=augment,
    )
    try:
        cfg = load_train_config(config, overrides)
        console.rule(f"[bold green]SkinNet training[/]  [white]({cfg.img_size}px, growth {cfg.base_growth})")
        summary = train(cfg, show_progress=not no_progress)
    except SkinNetError as e:
        raise _fail(e) from e

    table = Table(title=f"Folds - {cfg.out_dir}")
    table.add_column("Fold", style="cyan")
    table.add_column("Best epoch", style="white")
    table.add_column("Val loss", style="white")
    table.add_column("Val DC", style="green")
    table.add_column("Val JI", style="green")
    table.add_column("Status", style="magenta")
    for r in summary.folds:
        table.add_row(
            str(r.fold),
            str(r.best_epoch or "-"),
            f"{r.best_val_loss:.4f}" if r.best_val_loss is not None else "-",
            f"{r.best_val_dc:.4f}" if r.best_val_dc is not None else "-",
            f"{r.best_val_ji:.4f}" if r.best_val_ji is not None else "-",
            "aborted" if r.aborted else "ok",
        )
    console.print(table)
    if summary.mean_val_dc is not None:
        console.print(f"Mean best val DC [bold]{summary.mean_val_dc:.4f}[/], JI [bold]{summary.mean_val_ji:.4f}[/]")
    console.print(f"📁 Saved: [bold]{summary.curves_csv}[/]")
    if any(r.aborted for r in summary.folds):
        raise typer.Exit(code=1)


@app.command("eval")
def eval_cmd(
    checkpoint: Path = typer.Option(..., "--checkpoint", "-k", help="Checkpoint (.sknt) to evaluate"),
    data_dir: Path = typer.Option(None, "--data-dir", "-d", help="ISIC-layout folder with ground-truth masks"),
    synthetic: int = typer.Option(None, "--synthetic", help="Evaluate on N generated samples"),
    seed: int = typer.Option(0, "--seed", help="Seed for --synthetic"),
    out_dir: Path = typer.Option(Path("."), "--out-dir", "-o", help="Folder for eval.csv"),
    config: Path = typer.Option(None, "--config", "-c", help="Training config the checkpoint must match"),
    normalization: str = typer.Option(
        None, "--normalization", help="standardize|minmax|none (default: the config's, else standardize)"
    ),
    xlsx: bool = typer.Option(False, "--xlsx", help="Also write eval.xlsx"),
):
    """
    Score a checkpoint image by image (AC, DC, JI, SE, SP) and write eval.csv.
    """
    _require(checkpoint, "checkpoint")
    _require(config, "config file")
    _require(data_dir, "data directory")
    try:
        cfg = load_train_config(config) if config is not None else None
        expected = cfg.model_spec() if cfg is not None else None
        if normalization is None:
            normalization = cfg.normalization if cfg is not None else "standardize"
        if synthetic:
            data: Path | list[Sample] = synthetic_dataset(synthetic, size=load_spec(checkpoint).input_size, seed=seed)
        elif data_dir is not None:
            data = data_dir
        else:
            console.print("[red]Pass --data-dir or --synthetic N.[/]")
            raise typer.Exit(code=2)
        result = evaluate(
            checkpoint, data, out_dir, expected_spec=expected, normalization=_normalization(normalization), xlsx=xlsx
        )
    except SkinNetError as e:
        raise _fail(e) from e

    table = Table(title=f"Evaluation - {checkpoint.name} ({len(result.per_image)} images)")
    table.add_column("Metric", style="cyan")
    table.add_column("Mean", style="white")
    for name in METRIC_NAMES:
        table.add_row(name.upper(), f"{getattr(result.aggregate, name):.4f}")
    console.print(table)
    console.print(f"📁 Saved: [bold]{result.csv_path}[/]")
    if result.xlsx_path is not None:
        console.print(f"📦 XLSX saved → [bold]{result.xlsx_path}[/]")


@app.command("predict")
def predict_cmd(
    image: Path = typer.Argument(..., help="8-bit RGB image to segment"),
    checkpoint: Path = typer.Option(..., "--checkpoint", "-k", help="Checkpoint (.sknt)"),
    out: Path = typer.Option(None, "--out", help="Output mask PNG (default: <out-dir>/<image>_mask.png)"),
    out_dir: Path = typer.Option(Path("."), "--out-dir", "-o", help="Folder for the default output name"),
    normalization: str = typer.Option("standardize", "--normalization", help="standardize|minmax|none"),
):
    """
    Write a lesion mask PNG (255 = lesion, 0 = background) at the model's input size.
    """
    _require(checkpoint, "checkpoint")
    _require(image, "image")
    if out is None:
        out = out_dir / f"{image.stem}_mask.png"
    try:
        path = predict(checkpoint, image, out, _normalization(normalization))
    except SkinNetError as e:
        raise _fail(e) from e
    console.print(f"🖼️ Mask saved → [bold]{path}[/]")


@app.command("split")
def split_cmd(
    data_dir: Path = typer.Option(None, "--data-dir", "-d", help="ISIC-layout folder"),
    synthetic: int = typer.Option(None, "--synthetic", help="Split N generated sample ids"),
    folds: int = typer.Option(5, "--folds", help="Number of folds"),
    seed: int = typer.Option(0, "--seed", help="Shuffle seed"),
    out_dir: Path = typer.Option(Path("."), "--out-dir", "-o", help="Folder for folds.json"),
):
    """
    Write the seeded k-fold split of a dataset to folds.json.
    """
    _require(data_dir, "data directory")
    try:
        if synthetic:
            ids = [f"synthetic_{i:04d}" for i in range(synthetic)]
        elif data_dir is not None:
            ids = [s.id for s in load_dataset(data_dir)]
        else:
            console.print("[red]Pass --data-dir or --synthetic N.[/]")
            raise typer.Exit(code=2)
        split = kfold_split(ids, folds, seed)
    except SkinNetError as e:
        raise _fail(e) from e

    ensure_dir(out_dir)
    out_json = out_dir / "folds.json"
    write_json(out_json, split.model_dump())

    table = Table(title=f"{split.k}-fold split of {len(ids)} samples (seed {seed})")
    table.add_column("Fold", style="cyan")
    table.add_column("Validation", style="white")
    table.add_column("Training", style="white")
    for i, fold in enumerate(split.folds):
        table.add_row(str(i), str(len(fold)), str(len(ids) - len(fold)))
    console.print(table)
    console.print(f"📁 Saved: [bold]{out_json}[/]")


@app.command("selftest")
def selftest_cmd(
    mode: str = typer.Argument("all", help="grad|oracle|all"),
    cases: int = typer.Option(20, "--cases", help="Random cases per check"),
    seed: int = typer.Option(0, "--seed", help="Seed for the random cases"),
):
    """
    Run the gradient-check and/or reference-oracle suites. Exit code 0 iff every check passes.
    """
    if mode not in ("grad", "oracle", "all"):
        console.print("[red]Unsupported mode. Use grad, oracle or all.[/]")
        raise typer.Exit(code=2)
    selected: SelftestMode = mode  # type: ignore[assignment]
    console.rule(f"[bold green]Selftest[/]  [white]({mode})")
    report = selftest(selected, cases=cases, seed=seed)

    table = Table(title="Checks")
    table.add_column("Check", style="cyan")
    table.add_column("Passed", style="white")
    for name, (ok, total) in report.summary().items():
        style = "green" if ok == total else "red"
        table.add_row(name, f"[{style}]{ok}/{total}[/]")
    console.print(table)
    for c in report.failures[:10]:
        console.print(f"[red]FAIL[/] {c.suite}/{c.name}: {c.value:.3g} {c.detail}")
    if not report.passed:
        raise typer.Exit(code=1)
    console.print("[bold green]All checks passed.[/]")


@app.command()
def doctor():
    """
    Print the runtime environment and run one oracle case.
    """
    table = Table(title="Environment")
    table.add_column("Component", style="cyan")
    table.add_column("Version", style="white")
    table.add_row("skinnet", __version__)
    table.add_row("Python", platform.python_version())
    table.add_row("numpy", np.__version__)
    table.add_row("Pillow", PIL.__version__)
    console.print(table)

    checks = oracle_suite(cases=1)
    failed = [c for c in checks if not c.passed]
    if failed:
        for c in failed:
            console.print(f"[red]FAIL[/] {c.name}: {c.value:.3g} {c.detail}")
        raise typer.Exit(code=1)
    console.print(f"[green]✓[/] {len(checks)} oracle checks passed")


def _normalization(value: str) -> Normalization:
    if value not in ("standardize", "minmax", "none"):
        console.print(f"[red]Unsupported normalization {value!r}. Use standardize, minmax or none.[/]")
        raise typer.Exit(code=2)
    return value  # type: ignore[return-value]
