"""
Unit tests for training configuration.
"""
import json

import pytest

from skinnet.config import TrainConfig, load_train_config, save_train_config
from skinnet.exceptions import ConfigError


@pytest.mark.unit
class TestTrainConfig:
    """Test TrainConfig defaults, sources and validation."""

    def test_defaults(self):
        cfg = TrainConfig()

        assert cfg.img_size == 64
        assert cfg.base_growth == 8
        assert cfg.batch_size == 8
        assert cfg.epochs == 100
        assert cfg.lr == 1e-4
        assert cfg.folds == 5

    def test_model_spec_and_schedule(self):
        cfg = TrainConfig(img_size=32, depth=2, base_growth=4, lr=1e-3, lr_patience=3)

        spec = cfg.model_spec()
        sched = cfg.schedule()

        assert (spec.input_size, spec.depth, spec.base_growth) == (32, 2, 4)
        assert sched.lr == 1e-3 and sched.patience == 3

    def test_img_size_must_divide(self):
        with pytest.raises(ConfigError):
            load_train_config(overrides={"img_size": 40, "depth": 4})

    def test_fold_out_of_range(self):
        with pytest.raises(ConfigError):
            load_train_config(overrides={"folds": 5, "fold": 5})

    def test_file_then_overrides(self, tmp_path):
        # Arrange
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"epochs": 3, "seed": 7, "batch_size": 2}))

        # Act
        cfg = load_train_config(path, {"epochs": 5, "seed": None})

        # Assert
        assert cfg.epochs == 5
        assert cfg.seed == 7
        assert cfg.batch_size == 2

    def test_environment_is_read(self, monkeypatch):
        monkeypatch.setenv("SKINNET_EPOCHS", "12")

        assert load_train_config().epochs == 12

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"epochz": 3}))

        with pytest.raises(ConfigError):
            load_train_config(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")

        with pytest.raises(ConfigError):
            load_train_config(path)

    def test_save_round_trip(self, tmp_path):
        cfg = TrainConfig(epochs=2, synthetic=10, seed=3)
        path = tmp_path / "config.json"

        save_train_config(cfg, path)

        assert load_train_config(path) == cfg

    def test_lr_below_min_lr(self):
        with pytest.raises(ConfigError):
            load_train_config(overrides={"lr": 1e-7, "min_lr": 1e-6})
