"""Tests for the shared and per-run logs."""

import logging

import pytest

from prior_lift.logging import (
    LOGGER_NAME,
    RUN_LOG_NAME,
    attach_run_log,
    get_logger,
    setup_logging,
)


@pytest.fixture(autouse=True)
def clean_logger():
    """Remove package log handlers after each test."""
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)


def flush() -> None:
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        handler.flush()


class TestSetupLogging:
    """Tests for setup_logging."""

    def test_repeated_setup_replaces_handlers(self, tmp_path):
        """A second setup swaps the shared file instead of adding handlers."""
        setup_logging(log_file=tmp_path / "a.log")
        logger = setup_logging(log_file=tmp_path / "b.log")
        assert len(logger.handlers) == 2
        get_logger("data").info("second")
        flush()
        assert "second" in (tmp_path / "b.log").read_text(encoding="utf-8")
        assert "second" not in (tmp_path / "a.log").read_text(encoding="utf-8")

    def test_child_logger_name(self):
        """Child loggers live under the package logger."""
        assert get_logger("training").name == f"{LOGGER_NAME}.training"
        assert get_logger().name == LOGGER_NAME


class TestAttachRunLog:
    """Tests for attach_run_log."""

    def test_lines_carry_command_and_seed(self, tmp_path):
        """Run-log lines name the command and seed of the run."""
        setup_logging(log_file=tmp_path / "shared.log")
        path = attach_run_log(tmp_path, "train", 7)
        get_logger("training").info("epoch 1 done")
        flush()
        assert path == tmp_path / RUN_LOG_NAME
        lines = path.read_text(encoding="utf-8").splitlines()
        assert "train seed=7 | prior_lift | Run started: train" in lines[0]
        assert lines[-1].endswith("train seed=7 | prior_lift.training | epoch 1 done")
        shared = (tmp_path / "shared.log").read_text(encoding="utf-8")
        assert "epoch 1 done" in shared
        assert "seed=7" not in shared

    def test_new_run_replaces_old(self, tmp_path):
        """Only the most recent run directory receives records."""
        setup_logging()
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        first = attach_run_log(tmp_path / "a", "eval", 1)
        second = attach_run_log(tmp_path / "b", "eval", 2)
        get_logger().info("later")
        flush()
        assert "later" not in first.read_text(encoding="utf-8")
        assert "later" in second.read_text(encoding="utf-8")
