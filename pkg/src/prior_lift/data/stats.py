"""Per-dimension standardization statistics of a training split."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from prior_lift.data.records import SampleRecord, stack_poses
from prior_lift.errors import InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.skeleton.topology import (
    FloatArray,
    Pose3D,
    SkeletonTopology,
    bone_lengths,
    root_center,
)

logger = get_logger("data")

MIN_STD = 1e-9


def _clamped_std(values: FloatArray) -> FloatArray:
    std = values.std(axis=0)
    # Constant dimensions (the root of a root-relative pose) standardize to zero.
    return np.where(std < MIN_STD, 1.0, std)


@dataclass(eq=False)
class DatasetStats:
    """Mean and standard deviation of every input and target dimension.

    Args:
        mean_2d: Mean of flattened 2D joints (2J,).
        std_2d: Standard deviation of flattened 2D joints (2J,).
        mean_3d: Mean of flattened root-relative 3D joints (3J,).
        std_3d: Standard deviation of flattened root-relative 3D joints (3J,).
        mean_bones: Mean bone lengths (B,).
        std_bones: Standard deviation of bone lengths (B,).
        sample_count: Number of records the statistics were taken over.
    """

    mean_2d: FloatArray
    std_2d: FloatArray
    mean_3d: FloatArray
    std_3d: FloatArray
    mean_bones: FloatArray
    std_bones: FloatArray
    sample_count: int

    @property
    def joint_count(self) -> int:
        """Joints covered by the statistics."""
        return self.mean_3d.size // 3

    @property
    def pose_scale(self) -> float:
        """Root-mean-square of the 3D standard deviations, in millimeters."""
        return float(np.sqrt(np.mean(self.std_3d * self.std_3d)))

    def standardize_2d(self, joints_2d: FloatArray) -> FloatArray:
        """(N, J, 2) pixels to standardized rows (N, 2J)."""
        flat = np.asarray(joints_2d, dtype=np.float64).reshape(-1, self.mean_2d.size)
        return (flat - self.mean_2d) / self.std_2d

    def standardize_3d(self, poses: Pose3D) -> FloatArray:
        """(N, J, 3) root-relative poses to standardized rows (N, 3J)."""
        flat = np.asarray(poses, dtype=np.float64).reshape(-1, self.mean_3d.size)
        return (flat - self.mean_3d) / self.std_3d

    def destandardize_3d(self, rows: FloatArray) -> Pose3D:
        """Standardized rows (N, 3J) back to poses (N, J, 3) in millimeters."""
        rows = np.asarray(rows, dtype=np.float64)
        return (rows * self.std_3d + self.mean_3d).reshape(-1, self.joint_count, 3)

    def standardize_bones(self, lengths: FloatArray) -> FloatArray:
        """(N, B) bone lengths to standardized rows."""
        flat = np.asarray(lengths, dtype=np.float64).reshape(-1, self.mean_bones.size)
        return (flat - self.mean_bones) / self.std_bones

    def to_dict(self) -> dict:
        """JSON form."""
        return {
            "mean_2d": self.mean_2d.tolist(),
            "std_2d": self.std_2d.tolist(),
            "mean_3d": self.mean_3d.tolist(),
            "std_3d": self.std_3d.tolist(),
            "mean_bones": self.mean_bones.tolist(),
            "std_bones": self.std_bones.tolist(),
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetStats":
        """Rebuild statistics from their JSON form."""
        arrays = {
            key: np.asarray(data[key], dtype=np.float64)
            for key in ("mean_2d", "std_2d", "mean_3d", "std_3d", "mean_bones", "std_bones")
        }
        return cls(**arrays, sample_count=int(data["sample_count"]))

    def save(self, path: Path) -> None:
        """Write the statistics as JSON."""
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "DatasetStats":
        """Read statistics written by ``save``."""
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def compute_stats(records: list[SampleRecord], topo: SkeletonTopology) -> DatasetStats:
    """Statistics over a training split.

    3D statistics are taken over root-relative poses, bone statistics over
    3D bone lengths. Standard deviations below 1e-9 are replaced by 1.

    Raises:
        InvalidInputError: If fewer than two records are given.
    """
    if len(records) < 2:
        raise InvalidInputError(f"Statistics need at least 2 records, got {len(records)}.")
    joints_3d, joints_2d = stack_poses(records)
    flat_2d = joints_2d.reshape(len(records), -1)
    flat_3d = root_center(joints_3d, topo).reshape(len(records), -1)
    lengths = bone_lengths(joints_3d, topo)
    return DatasetStats(
        mean_2d=flat_2d.mean(axis=0),
        std_2d=_clamped_std(flat_2d),
        mean_3d=flat_3d.mean(axis=0),
        std_3d=_clamped_std(flat_3d),
        mean_bones=lengths.mean(axis=0),
        std_bones=_clamped_std(lengths),
        sample_count=len(records),
    )


def sidecar_path(dataset_path: Path) -> Path:
    """``train.jsonl`` -> ``train.stats.json``."""
    return dataset_path.with_name(f"{dataset_path.stem}.stats.json")


def write_sidecar(records: list[SampleRecord], dataset_path: Path, topo: SkeletonTopology) -> Path:
    """Compute statistics for a saved dataset and write them next to it."""
    path = sidecar_path(dataset_path)
    compute_stats(records, topo).save(path)
    logger.info("Wrote statistics sidecar %s", path)
    return path
