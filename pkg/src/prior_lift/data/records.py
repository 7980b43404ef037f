"""Paired 2D/3D pose samples and their JSON Lines storage."""

import json
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from prior_lift.camera.intrinsics import CameraIntrinsics
from prior_lift.errors import DatasetParseError, DatasetValidationError, InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.skeleton.topology import Pose2D, Pose3D, SkeletonTopology

logger = get_logger("data")

RECORD_FIELDS = ("joints_3d", "joints_2d", "camera", "subject_id", "action_id")


@dataclass(eq=False)
class SampleRecord:
    """One observed pose with its ground truth.

    Args:
        joints_3d: Camera-frame joints (J, 3) in millimeters, every z > 0.
        joints_2d: Pixel joints (J, 2).
        camera: Intrinsics the 2D joints were observed with, if known.
        subject_id: Subject label, e.g. "S1".
        action_id: Action label, e.g. "walking".
    """

    joints_3d: Pose3D
    joints_2d: Pose2D
    camera: CameraIntrinsics | None
    subject_id: str
    action_id: str

    def to_dict(self) -> dict:
        """JSON object with the field names of the record."""
        return {
            "joints_3d": np.asarray(self.joints_3d, dtype=np.float64).tolist(),
            "joints_2d": np.asarray(self.joints_2d, dtype=np.float64).tolist(),
            "camera": self.camera.to_dict() if self.camera is not None else None,
            "subject_id": self.subject_id,
            "action_id": self.action_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleRecord":
        """Build a record from its JSON object, without invariant checks."""
        camera = data["camera"]
        return cls(
            joints_3d=np.asarray(data["joints_3d"], dtype=np.float64),
            joints_2d=np.asarray(data["joints_2d"], dtype=np.float64),
            camera=CameraIntrinsics.from_dict(camera) if camera is not None else None,
            subject_id=str(data["subject_id"]),
            action_id=str(data["action_id"]),
        )


def validate_record(record: SampleRecord, index: int, topo: SkeletonTopology) -> None:
    """Check shape, finiteness and positive depth of one record.

    Raises:
        DatasetValidationError: Naming the record and, where it applies, the joint.
    """
    joints_3d, joints_2d = record.joints_3d, record.joints_2d
    if joints_3d.shape != (topo.joint_count, 3):
        raise DatasetValidationError(
            index, f"joints_3d has shape {joints_3d.shape}, expected ({topo.joint_count}, 3)"
        )
    if joints_2d.shape != (topo.joint_count, 2):
        raise DatasetValidationError(
            index, f"joints_2d has shape {joints_2d.shape}, expected ({topo.joint_count}, 2)"
        )
    for name, joints in (("joints_3d", joints_3d), ("joints_2d", joints_2d)):
        bad = np.flatnonzero(~np.isfinite(joints).all(axis=1))
        if bad.size:
            raise DatasetValidationError(index, f"{name} is not finite", joint=int(bad[0]))
    behind = np.flatnonzero(joints_3d[:, 2] <= 0)
    if behind.size:
        joint = int(behind[0])
        raise DatasetValidationError(
            index, f"depth {joints_3d[joint, 2]:.6g} mm is not positive", joint=joint
        )


def save_dataset(records: Iterable[SampleRecord], path: Path) -> int:
    """Write records as JSON Lines, one object per line.

    Returns:
        Number of records written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict()) + "\n")
            count += 1
    logger.info("Saved %d records to %s", count, path)
    return count


def load_dataset(path: Path, topo: SkeletonTopology) -> list[SampleRecord]:
    """Read and validate a JSON Lines dataset, stopping at the first bad line.

    Args:
        path: Dataset file.
        topo: Topology every record must match.

    Returns:
        The records in file order.

    Raises:
        DatasetParseError: If a line is not a JSON object with every field.
        DatasetValidationError: If a record breaks a record invariant.
    """
    records: list[SampleRecord] = []
    with path.open(encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetParseError(line_number, e.msg) from e
            if not isinstance(data, dict):
                raise DatasetParseError(line_number, "expected a JSON object")
            missing = [name for name in RECORD_FIELDS if name not in data]
            if missing:
                raise DatasetParseError(line_number, f"missing field {missing[0]!r}")

            index = len(records)
            try:
                record = SampleRecord.from_dict(data)
            except (TypeError, ValueError, KeyError) as e:
                raise DatasetValidationError(index, str(e)) from e
            validate_record(record, index, topo)
            records.append(record)

    logger.info("Loaded %d records from %s", len(records), path)
    return records


def stack_poses(records: list[SampleRecord]) -> tuple[Pose3D, Pose2D]:
    """Stack records into (N, J, 3) and (N, J, 2) arrays."""
    if not records:
        raise InvalidInputError("No records to stack.")
    joints_3d = np.stack([record.joints_3d for record in records])
    joints_2d = np.stack([record.joints_2d for record in records])
    return joints_3d, joints_2d


def split_by_subject(
    records: list[SampleRecord],
    test_subjects: Iterable[str],
) -> tuple[list[SampleRecord], list[SampleRecord]]:
    """Partition records into train and test splits by whole subjects."""
    held_out = set(test_subjects)
    train = [record for record in records if record.subject_id not in held_out]
    test = [record for record in records if record.subject_id in held_out]
    return train, test
