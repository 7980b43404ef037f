"""Tests for the training loop and its config."""

from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from prior_lift.data.records import save_dataset
from prior_lift.errors import InvalidInputError, VariantMismatchError
from prior_lift.model.lifting import InputVariant
from prior_lift.training.trainer import TrainConfig, train


class TestTrainConfig:
    """Tests for TrainConfig validation."""

    def test_defaults(self):
        """The default run uses every prior and both loss terms."""
        config = TrainConfig()
        assert config.variant is InputVariant.JOINTS_CAMERA_BONES
        assert config.batch_size == 64
        assert (config.loss_weights.w_mse, config.loss_weights.w_dir) == (0.5, 0.5)
        assert config.topology().joint_count == 16

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epochs": 0},
            {"batch_size": 1},
            {"learning_rate": 0.0},
            {"w_mse": 0.0, "w_dir": 0.0},
            {"w_dir": -0.5},
            {"camera_width": 5},
            {"keep_prob": 0.0},
            {"direction_reduction": "joint"},
            {"learning_rte": 0.1},
        ],
    )
    def test_invalid(self, kwargs):
        """Out-of-range values and unknown keys are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(**kwargs)

    def test_variant_from_string(self):
        """Variants parse from their names."""
        assert TrainConfig(variant="joints_only").variant is InputVariant.JOINTS_ONLY


class TestTrain:
    """Tests for train."""

    def test_metrics_per_epoch(self, tiny_config, split_records):
        """One metrics row per epoch with the decayed learning rate."""
        train_records, test_records = split_records
        result = train(tiny_config, train_records, test_records)
        assert [row.epoch for row in result.metrics] == [1, 2]
        assert all(np.isfinite(row.train_loss) for row in result.metrics)
        assert result.metrics[0].learning_rate == pytest.approx(1e-3)
        assert result.final_report.sample_count == len(test_records)
        assert result.optimizer.step == 4

    def test_best_epoch(self, tiny_config, split_records):
        """The best snapshot is the epoch with the lowest test MPJPE."""
        result = train(tiny_config.model_copy(update={"epochs": 3}), *split_records)
        errors = [row.mpjpe_mm for row in result.metrics]
        assert result.best_epoch == int(np.argmin(errors)) + 1
        assert result.best_report.mpjpe_mm == min(errors)

    def test_deterministic(self, tiny_config, split_records):
        """The same seed reproduces the run exactly."""
        first = train(tiny_config, *split_records)
        second = train(tiny_config, *split_records)
        assert first.metrics == second.metrics
        for name, value in first.network.mlp.state_dict().items():
            np.testing.assert_array_equal(value, second.network.mlp.state_dict()[name])

    def test_seed_matters(self, tiny_config, split_records):
        """Different seeds give different networks."""
        first = train(tiny_config, *split_records)
        second = train(tiny_config.model_copy(update={"seed": 1}), *split_records)
        assert first.metrics != second.metrics

    def test_on_epoch_callback(self, tiny_config, split_records):
        """The callback sees every epoch's metrics."""
        seen = []
        result = train(tiny_config, *split_records, on_epoch=seen.append)
        assert seen == result.metrics

    @pytest.mark.parametrize("reduction", ["component", "bone"])
    def test_direction_only(self, tiny_config, split_records, reduction):
        """Training with only the direction term runs."""
        config = tiny_config.model_copy(
            update={"w_mse": 0.0, "w_dir": 1.0, "direction_reduction": reduction}
        )
        result = train(config, *split_records)
        assert len(result.metrics) == 2

    def test_reads_configured_paths(self, tiny_config, split_records, tmp_path):
        """Splits are read from the configured files when not passed."""
        train_path = tmp_path / "train.jsonl"
        test_path = tmp_path / "test.jsonl"
        save_dataset(split_records[0], train_path)
        save_dataset(split_records[1], test_path)
        config = TrainConfig.model_validate(
            {**tiny_config.model_dump(), "train_path": train_path, "test_path": test_path}
        )
        from_files = train(config)
        in_memory = train(tiny_config, *split_records)
        assert from_files.metrics == in_memory.metrics

    def test_missing_split(self, tiny_config, split_records):
        """Without records or paths there is nothing to train on."""
        with pytest.raises(InvalidInputError):
            train(tiny_config, split_records[0])

    def test_empty_test_split(self, tiny_config, split_records):
        """An empty test split is rejected."""
        with pytest.raises(InvalidInputError):
            train(tiny_config, split_records[0], [])

    def test_camera_variant_needs_cameras(self, tiny_config, split_records):
        """Camera variants refuse records without intrinsics."""
        train_records, test_records = split_records
        stripped = [replace(r, camera=None) for r in test_records]
        with pytest.raises(VariantMismatchError):
            train(tiny_config, train_records, stripped)
