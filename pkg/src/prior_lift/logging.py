"""Logging for prior-lift: a shared log under the runs directory plus one log per run.

Every command logs to ``<runs_dir>/prior_lift.log`` and, once its run
directory exists, to ``<run_dir>/run.log``. Run-log lines carry the command
and seed so a log file copied out of its directory still says where it came
from. Warnings and errors also go to stderr.
"""

import logging
import sys
from pathlib import Path
from typing import Literal

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]

LOGGER_NAME = "prior_lift"
RUN_LOG_NAME = "run.log"

_SHARED_HANDLER = "prior_lift.shared"
_CONSOLE_HANDLER = "prior_lift.console"
_RUN_HANDLER = "prior_lift.run"

_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
_SHARED_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
_RUN_FORMAT = "%(asctime)s | %(levelname)-8s | %(command)s seed=%(seed)d | %(name)s | %(message)s"


class RunContextFilter(logging.Filter):
    """Stamps the command and seed of the current run onto every record."""

    def __init__(self, command: str, seed: int) -> None:
        super().__init__()
        self.command = command
        self.seed = seed

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        record.seed = self.seed
        return True


def _replace_handler(logger: logging.Logger, handler: logging.Handler, name: str) -> None:
    for existing in list(logger.handlers):
        if existing.get_name() == name:
            logger.removeHandler(existing)
            existing.close()
    handler.set_name(name)
    logger.addHandler(handler)


def setup_logging(
    level: LogLevel = "INFO",
    log_file: Path | None = None,
) -> logging.Logger:
    """Configure and return the package logger.

    Calling it again replaces the handlers it installed earlier, so a second
    command in the same process logs under its own settings.

    Args:
        level: Level of the file handlers.
        log_file: Shared log file; no file handler when None.

    Returns:
        The package logger.
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(getattr(logging, level))

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.WARNING)
    console_handler.setFormatter(logging.Formatter(_SHARED_FORMAT, datefmt=_DATE_FORMAT))
    _replace_handler(logger, console_handler, _CONSOLE_HANDLER)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(getattr(logging, level))
        file_handler.setFormatter(logging.Formatter(_SHARED_FORMAT, datefmt=_DATE_FORMAT))
        _replace_handler(logger, file_handler, _SHARED_HANDLER)

    return logger


def attach_run_log(run_dir: Path, command: str, seed: int) -> Path:
    """Send package log records to ``run_dir/run.log``, replacing any earlier run log.

    Args:
        run_dir: Existing run directory.
        command: Subcommand stamped on each line.
        seed: Run seed stamped on each line.

    Returns:
        Path of the run log.
    """
    logger = logging.getLogger(LOGGER_NAME)
    path = run_dir / RUN_LOG_NAME
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setLevel(logger.level or logging.INFO)
    handler.addFilter(RunContextFilter(command, seed))
    handler.setFormatter(logging.Formatter(_RUN_FORMAT, datefmt=_DATE_FORMAT))
    _replace_handler(logger, handler, _RUN_HANDLER)
    logger.info("Run started: %s in %s", command, run_dir)
    return path


def get_logger(name: str | None = None) -> logging.Logger:
    """Package logger, or its child such as ``prior_lift.training``."""
    if name:
        return logging.getLogger(f"{LOGGER_NAME}.{name}")
    return logging.getLogger(LOGGER_NAME)
