"""Configuration management using Pydantic settings."""

from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Args:
        runs_dir: Directory where run directories are created.
        log_level: Logging level for file output.
        max_workers: Maximum concurrent ablation cells.
    """

    model_config = SettingsConfigDict(
        env_prefix="PRIOR_LIFT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    runs_dir: Path = Field(
        default=Path("runs"),
        description="Directory for run outputs",
    )
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO",
        description="Logging level",
    )
    max_workers: int = Field(
        default=1,
        ge=1,
        le=16,
        description="Maximum concurrent workers for ablation cells",
    )

    @property
    def log_path(self) -> Path:
        """Path to the log file."""
        return self.runs_dir / "prior_lift.log"

    def ensure_directories(self) -> None:
        """Create necessary directories if they don't exist."""
        self.runs_dir.mkdir(parents=True, exist_ok=True)


def get_settings() -> Settings:
    """Get the application settings."""
    return Settings()
