"""Converter from Human3.6M-style arrays to JSON Lines records.

The dataset itself is not bundled. The converter reads an ``.npz`` archive
holding per-frame camera-frame joints and labels, plus a JSON list of camera
intrinsics, and writes records in the 16-joint layout.

Expected archive keys:
    joints_3d: (N, 17 | 32, 3) camera-frame joints.
    subject: (N,) subject labels such as "S9".
    action: (N,) action labels.
    camera_index: (N,) index into the camera list.
    joints_2d: optional (N, 17 | 32, 2) detections used instead of projection.
"""

import json
from enum import Enum
from pathlib import Path

import numpy as np

from prior_lift.camera.intrinsics import CameraIntrinsics, project
from prior_lift.data.records import SampleRecord, validate_record
from prior_lift.errors import BehindCameraError, DatasetValidationError, InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.skeleton.topology import SkeletonTopology, default_topology

logger = get_logger("data")

# Source joint for each joint of the default 16-joint layout.
JOINT_MAPS: dict[int, tuple[int, ...]] = {
    32: (0, 1, 2, 3, 6, 7, 8, 12, 13, 15, 17, 18, 19, 25, 26, 27),
    17: (0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16),
}

TEST_SUBJECTS = ("S9", "S11")

REQUIRED_KEYS = ("joints_3d", "subject", "action", "camera_index")


class LengthUnit(Enum):
    """Unit of the archive's 3D joints."""

    MILLIMETERS = "mm"
    METERS = "m"


def parse_camera(data: dict) -> CameraIntrinsics:
    """Read intrinsics in either ``{fx, fy, cx, cy, res_w, res_h}`` or
    ``{center, focal_length, res_w, res_h}`` form."""
    if "focal_length" in data:
        return CameraIntrinsics(
            fx=float(data["focal_length"][0]),
            fy=float(data["focal_length"][1]),
            cx=float(data["center"][0]),
            cy=float(data["center"][1]),
            res_w=int(data["res_w"]),
            res_h=int(data["res_h"]),
        )
    return CameraIntrinsics.from_dict(data)


def load_cameras(path: Path) -> list[CameraIntrinsics]:
    """Read a JSON list of cameras."""
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list) or not data:
        raise InvalidInputError(f"{path} must hold a non-empty JSON list of cameras.")
    return [parse_camera(entry) for entry in data]


def import_h36m(
    npz_path: Path,
    cameras_path: Path,
    units: LengthUnit | str = LengthUnit.MILLIMETERS,
    topo: SkeletonTopology | None = None,
) -> list[SampleRecord]:
    """Convert a Human3.6M-style archive into validated records.

    Without ``joints_2d`` in the archive, 2D joints are the projection of the
    3D ground truth with the frame's camera.

    Args:
        npz_path: Archive with the keys listed in the module docstring.
        cameras_path: JSON list of camera intrinsics.
        units: Length unit of ``joints_3d``; meters are converted to millimeters.
        topo: Target topology, the default 16-joint skeleton unless given.

    Returns:
        Records in frame order.

    Raises:
        InvalidInputError: On unknown joint layouts, missing keys or bad camera indices.
        DatasetValidationError: If a frame has a joint behind the camera.
    """
    try:
        units = LengthUnit(units)
    except ValueError as e:
        raise InvalidInputError(f"Unknown length unit {units!r}; use mm or m.") from e
    topo = topo or default_topology()
    if topo.joint_count != 16:
        raise InvalidInputError("The converter targets the 16-joint layout.")
    cameras = load_cameras(cameras_path)

    with np.load(npz_path, allow_pickle=False) as archive:
        missing = [key for key in REQUIRED_KEYS if key not in archive]
        if missing:
            raise InvalidInputError(f"Archive {npz_path} lacks keys {missing}.")
        joints_3d = np.asarray(archive["joints_3d"], dtype=np.float64)
        subjects = archive["subject"].astype(str)
        actions = archive["action"].astype(str)
        camera_index = archive["camera_index"].astype(int)
        joints_2d = (
            np.asarray(archive["joints_2d"], dtype=np.float64) if "joints_2d" in archive else None
        )

    if joints_3d.ndim != 3 or joints_3d.shape[1] not in JOINT_MAPS or joints_3d.shape[2] != 3:
        raise InvalidInputError(f"joints_3d must be (N, 17 | 32, 3), got {joints_3d.shape}.")
    frames = joints_3d.shape[0]
    labels = {"subject": subjects, "action": actions, "camera_index": camera_index}
    for name, values in labels.items():
        if values.shape != (frames,):
            raise InvalidInputError(f"{name} must have shape ({frames},), got {values.shape}.")
    if camera_index.size and (camera_index.min() < 0 or camera_index.max() >= len(cameras)):
        raise InvalidInputError("camera_index refers to a camera outside the camera list.")

    joint_map = list(JOINT_MAPS[joints_3d.shape[1]])
    joints_3d = joints_3d[:, joint_map]
    if units is LengthUnit.METERS:
        joints_3d = joints_3d * 1000.0
    if joints_2d is not None:
        if (
            joints_2d.ndim != 3
            or joints_2d.shape[0] != frames
            or joints_2d.shape[1] not in JOINT_MAPS
            or joints_2d.shape[2] != 2
        ):
            raise InvalidInputError(f"joints_2d has unexpected shape {joints_2d.shape}.")
        joints_2d = joints_2d[:, list(JOINT_MAPS[joints_2d.shape[1]])]

    records: list[SampleRecord] = []
    for i in range(frames):
        camera = cameras[int(camera_index[i])]
        if joints_2d is not None:
            observed = joints_2d[i]
        else:
            try:
                observed = project(joints_3d[i], camera)
            except BehindCameraError as e:
                raise DatasetValidationError(i, str(e), joint=e.joint) from e
        record = SampleRecord(
            joints_3d=joints_3d[i],
            joints_2d=observed,
            camera=camera,
            subject_id=str(subjects[i]),
            action_id=str(actions[i]),
        )
        validate_record(record, i, topo)
        records.append(record)

    logger.info("Imported %d frames from %s", len(records), npz_path)
    return records
