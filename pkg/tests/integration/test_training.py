"""
End-to-end tests for training, evaluation and prediction on synthetic data.
"""
import json

import numpy as np
import pytest
from PIL import Image

from skinnet.config import TrainConfig
from skinnet.data.dataset import write_image_png
from skinnet.data.models import Sample
from skinnet.data.synthetic import synthetic_dataset
from skinnet.exceptions import CheckpointError, DataError
from skinnet.network.checkpoint import save_checkpoint
from skinnet.network.model import ModelSpec, build_skinnet, forward
from skinnet.objective.metrics import binarize
from skinnet.training import evaluate, predict, train
from skinnet.training.evaluate import EVAL_CSV
from skinnet.training.trainer import chunks, to_batch


def _quick_config(out_dir, **kwargs) -> TrainConfig:
    values = dict(
        out_dir=out_dir,
        synthetic=10,
        img_size=16,
        depth=2,
        base_growth=2,
        batch_size=4,
        epochs=1,
        folds=5,
        workers=0,
        plot_curves=False,
    )
    values.update(kwargs)
    return TrainConfig(**values)


@pytest.fixture
def toy_checkpoint(tmp_path, small_spec):
    return save_checkpoint(build_skinnet(small_spec, rng_seed=3), tmp_path / "toy.sknt")


@pytest.mark.integration
class TestTrain:
    """Test cross-validated training runs."""

    def test_five_folds_one_epoch(self, tmp_path):
        # Arrange
        cfg = _quick_config(tmp_path / "run")

        # Act
        summary = train(cfg, show_progress=False)

        # Assert
        assert [r.fold for r in summary.folds] == [0, 1, 2, 3, 4]
        assert not any(r.aborted for r in summary.folds)
        for i in range(5):
            assert (cfg.out_dir / f"fold{i}_best.sknt").exists()
            assert (cfg.out_dir / f"fold{i}_best.sknt.json").exists()
        lines = summary.curves_csv.read_text().splitlines()
        assert lines[0] == "fold,epoch,train_loss,val_loss,val_dc,val_ji,lr"
        assert len(lines) == 6
        saved = json.loads((cfg.out_dir / "summary.json").read_text())
        assert len(saved["folds"]) == 5 and "records" not in saved

    def test_single_fold_with_augmentation(self, tmp_path):
        cfg = _quick_config(tmp_path / "run", fold=2, epochs=2, augment=True, workers=2)

        summary = train(cfg, show_progress=False)

        assert [r.fold for r in summary.folds] == [2]
        assert [(r.fold, r.epoch) for r in summary.records] == [(2, 1), (2, 2)]
        assert not (cfg.out_dir / "fold0_best.sknt").exists()

    def test_seeded_runs_are_byte_identical(self, tmp_path):
        a = _quick_config(tmp_path / "a", epochs=2, augment=True, workers=2)
        b = _quick_config(tmp_path / "b", epochs=2, augment=True, workers=2)

        train(a, show_progress=False)
        train(b, show_progress=False)

        assert (a.out_dir / "curves.csv").read_bytes() == (b.out_dir / "curves.csv").read_bytes()
        for i in range(5):
            name = f"fold{i}_best.sknt"
            assert (a.out_dir / name).read_bytes() == (b.out_dir / name).read_bytes()

    def test_too_few_samples_for_folds(self, tmp_path):
        with pytest.raises(DataError):
            train(_quick_config(tmp_path / "run", synthetic=3), show_progress=False)

    def test_trains_from_directory(self, tmp_path, isic_dir):
        cfg = _quick_config(tmp_path / "run", synthetic=None, data_dir=isic_dir, folds=2)

        summary = train(cfg, show_progress=False)

        assert len(summary.folds) == 2


@pytest.mark.integration
class TestEvaluate:
    """Test checkpoint evaluation."""

    def test_own_predictions_score_perfectly(self, tmp_path, toy_checkpoint, small_spec, rng):
        """Ground truth equal to the model's own predictions gives every metric 1."""
        # Arrange
        model = build_skinnet(small_spec, rng_seed=3)
        images = [rng.uniform(0, 1, size=(16, 16, 3)).astype(np.float32) for _ in range(5)]
        placeholder = [Sample(image=im, mask=np.zeros((16, 16), np.uint8), id=f"p{i}") for i, im in enumerate(images)]
        samples = []
        for batch in chunks(placeholder, 8):
            x, _ = to_batch(batch, 2)
            for s, pred in zip(batch, binarize(forward(model, x))):
                samples.append(Sample(image=s.image, mask=pred, id=s.id))

        # Act
        result = evaluate(toy_checkpoint, samples, tmp_path, normalization="none", workers=0)

        # Assert
        for name in ("ac", "dc", "ji", "se", "sp"):
            assert getattr(result.aggregate, name) == pytest.approx(1.0)
        lines = result.csv_path.read_text().splitlines()
        assert lines[0] == "id,ac,dc,ji,se,sp"
        assert lines[-1] == "mean,1.0000,1.0000,1.0000,1.0000,1.0000"
        assert len(lines) == 7

    def test_empty_set_writes_nothing(self, tmp_path, toy_checkpoint):
        with pytest.raises(DataError):
            evaluate(toy_checkpoint, [], tmp_path / "out")

        assert not (tmp_path / "out" / EVAL_CSV).exists()

    def test_directory_and_xlsx(self, tmp_path, toy_checkpoint, isic_dir):
        result = evaluate(toy_checkpoint, isic_dir, tmp_path / "out", xlsx=True, workers=0)

        assert len(result.per_image) == 4
        assert result.xlsx_path is not None and result.xlsx_path.exists()

    def test_architecture_mismatch(self, tmp_path, toy_checkpoint, small_spec):
        other = ModelSpec(depth=2, base_growth=4, input_size=16, rates=small_spec.rates)

        with pytest.raises(CheckpointError):
            evaluate(toy_checkpoint, synthetic_dataset(2, size=16), tmp_path, expected_spec=other)


@pytest.mark.integration
class TestPredict:
    """Test single-image prediction."""

    def test_predict_is_repeatable(self, tmp_path, toy_checkpoint):
        image = write_image_png(synthetic_dataset(1, size=40, seed=2)[0].image, tmp_path / "lesion.png")

        a = predict(toy_checkpoint, image, tmp_path / "a.png")
        b = predict(toy_checkpoint, image, tmp_path / "b.png")

        assert a.read_bytes() == b.read_bytes()
        mask = np.asarray(Image.open(a))
        assert mask.shape == (16, 16)
        assert set(np.unique(mask)) <= {0, 255}


@pytest.mark.integration
@pytest.mark.slow
class TestOverfit:
    """A small model memorizes eight samples."""

    def test_overfits_eight_samples(self, tmp_path):
        # Arrange
        cfg = TrainConfig(
            out_dir=tmp_path / "run",
            synthetic=8,
            img_size=64,
            depth=4,
            base_growth=8,
            lr=1e-4,
            batch_size=8,
            epochs=200,
            folds=1,
            augment=False,
            workers=0,
            plot_curves=False,
        )

        # Act
        summary = train(cfg, show_progress=False)
        result = evaluate(cfg.out_dir / "fold0_best.sknt", synthetic_dataset(8, size=64, seed=0), tmp_path, workers=0)

        # Assert
        losses = np.array([r.train_loss for r in summary.records])
        smoothed = losses.reshape(-1, 10).mean(axis=1)
        assert np.all(np.diff(smoothed) <= 1e-3)
        assert summary.records[-1].val_dc >= 0.95
        assert result.aggregate.dc >= 0.95
