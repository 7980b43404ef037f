"""Synthetic subjects, poses and camera observations.

Each subject gets fixed bone lengths drawn once from anthropometric ranges:
every bone sits at the subject's body-size quantile within its range, give
or take a small per-bone jitter, so bone-length vectors vary mainly with
body size.
Each sample rotates every bone by local joint angles within the per-joint
limits (scaled by the sample's action), turns and places the body in front
of a camera from the pool, and projects it.

Every subject and sample draws from its own generator seeded by
``(seed, ...)``, so a sample depends only on the seed, its indices and the
configuration.
"""

import logging
import math
from importlib import resources
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.transform import Rotation
from tenacity import before_sleep_log, retry, retry_if_exception_type, stop_after_attempt

from prior_lift.camera.intrinsics import CameraIntrinsics, project
from prior_lift.core.rng import Rng, make_rng
from prior_lift.data.records import SampleRecord
from prior_lift.errors import BehindCameraError, GenerationError, InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.skeleton.topology import FloatArray, Pose3D, SkeletonTopology

logger = get_logger("data")

DEFAULT_CONFIG_NAME = "default_generation.json"

Range = tuple[float, float]

# Body frame is y-up; the camera frame is y-down with z into the scene.
BODY_TO_CAMERA = Rotation.from_euler("x", 180.0, degrees=True)

# Successive subjects step through body sizes by the golden ratio.
GOLDEN_STEP = (math.sqrt(5.0) - 1.0) / 2.0


def _check_range(value: Range) -> Range:
    if value[0] > value[1]:
        raise ValueError(f"range lower bound {value[0]} exceeds upper bound {value[1]}")
    return value


class JointSpec(BaseModel):
    """Bone and joint-angle settings for the bone ending at one joint."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    length_mm: Range = Field(description="Bone length range in millimeters")
    rest_direction: tuple[float, float, float] = Field(
        description="Body-frame bone direction with all joint angles at zero"
    )
    angle_limits_deg: tuple[Range, Range, Range] = Field(
        description="Local x, y, z Euler angle limits in degrees"
    )

    @field_validator("length_mm")
    @classmethod
    def _positive_length(cls, value: Range) -> Range:
        _check_range(value)
        if value[0] <= 0:
            raise ValueError("bone lengths must be positive")
        return value

    @field_validator("rest_direction")
    @classmethod
    def _unit_direction(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        norm = float(np.linalg.norm(value))
        if norm == 0.0:
            raise ValueError("rest direction must be nonzero")
        return tuple(float(v) / norm for v in value)

    @field_validator("angle_limits_deg")
    @classmethod
    def _ordered_limits(cls, value: tuple[Range, Range, Range]) -> tuple[Range, Range, Range]:
        for limit in value:
            _check_range(limit)
        return value


class ActionSpec(BaseModel):
    """An action label and how much of the angle limits it uses."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    angle_scale: float = Field(gt=0.0, le=1.0)


class CameraSpec(BaseModel):
    """A named camera of the pool."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    fx: float
    fy: float
    cx: float
    cy: float
    res_w: int
    res_h: int

    def to_intrinsics(self) -> CameraIntrinsics:
        """Validated intrinsics of this camera."""
        return CameraIntrinsics(
            fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy, res_w=self.res_w, res_h=self.res_h
        )


class GenerationConfig(BaseModel):
    """Ranges and limits driving the synthetic generator."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    joints: dict[str, JointSpec]
    root_depth_mm: Range = (3500.0, 6500.0)
    root_lateral_mm: Range = (-1200.0, 1200.0)
    root_vertical_mm: Range = (-200.0, 600.0)
    root_yaw_deg: Range = (-180.0, 180.0)
    root_tilt_deg: Range = (-10.0, 10.0)
    actions: list[ActionSpec] = Field(min_length=1)
    cameras: list[CameraSpec] = Field(min_length=1)
    proportion_jitter: float = Field(
        default=0.0,
        ge=0.0,
        le=0.5,
        description="Per-bone spread around the size quantile, as a fraction of the range",
    )
    max_retries: int = Field(default=20, ge=1)
    min_depth_mm: float = Field(default=100.0, gt=0.0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "GenerationConfig":
        for name in ("root_lateral_mm", "root_vertical_mm", "root_yaw_deg", "root_tilt_deg"):
            _check_range(getattr(self, name))
        _check_range(self.root_depth_mm)
        if self.root_depth_mm[0] <= 0:
            raise ValueError("root depth range must be positive")
        for camera in self.cameras:
            camera.to_intrinsics()
        return self

    def camera_pool(self) -> list[CameraIntrinsics]:
        """The configured cameras as intrinsics."""
        return [camera.to_intrinsics() for camera in self.cameras]

    def joint_specs(self, topo: SkeletonTopology) -> dict[int, JointSpec]:
        """Spec of every non-root joint, keyed by joint index.

        Raises:
            InvalidInputError: If a joint name of the topology has no spec.
        """
        names = [topo.joint_names[j] for j in topo.bone_children]
        missing = [name for name in names if name not in self.joints]
        if missing:
            raise InvalidInputError(f"Generation config has no spec for joints {missing}.")
        return {int(j): self.joints[topo.joint_names[j]] for j in topo.bone_children}


def load_generation_config(path: Path | None = None) -> GenerationConfig:
    """Read a generation config, or the packaged default when ``path`` is None."""
    if path is None:
        text = resources.files("prior_lift.data").joinpath(DEFAULT_CONFIG_NAME).read_text("utf-8")
    else:
        text = path.read_text(encoding="utf-8")
    return GenerationConfig.model_validate_json(text)


class SubjectProfile(BaseModel):
    """Fixed bone lengths of one synthetic subject, in bone order."""

    model_config = ConfigDict(frozen=True)

    subject_id: str
    bone_lengths: tuple[float, ...]

    def lengths_array(self) -> FloatArray:
        """Bone lengths as an array (B,)."""
        return np.asarray(self.bone_lengths, dtype=np.float64)


def make_subject_profile(
    subject_index: int,
    topo: SkeletonTopology,
    config: GenerationConfig,
    seed: int,
) -> SubjectProfile:
    """Draw the bone lengths of subject ``subject_index`` (0-based, labelled S1, S2, ...).

    The subject's size quantile is ``(offset + subject_index * GOLDEN_STEP) mod 1``
    with a seeded offset, so any run of consecutive subjects covers the size
    range evenly. Each bone takes that quantile of its ``length_mm`` range,
    moved by up to ``proportion_jitter`` and clipped to the range.
    """
    offset = float(make_rng((seed, 0)).uniform())
    size = (offset + subject_index * GOLDEN_STEP) % 1.0
    rng = make_rng((seed, 0, subject_index))
    jitter = config.proportion_jitter
    specs = config.joint_specs(topo)
    lengths = [0.0] * topo.bone_count
    for joint in topo.bone_children:
        low, high = specs[int(joint)].length_mm
        quantile = size
        if jitter > 0:
            quantile = min(max(size + float(rng.uniform(-jitter, jitter)), 0.0), 1.0)
        lengths[topo.bone_index(int(joint))] = low + quantile * (high - low)
    return SubjectProfile(subject_id=f"S{subject_index + 1}", bone_lengths=tuple(lengths))


def _uniform(rng: Rng, bounds: Range) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def pose_subject(
    profile: SubjectProfile,
    topo: SkeletonTopology,
    config: GenerationConfig,
    rng: Rng,
    angle_scale: float = 1.0,
) -> Pose3D:
    """Forward kinematics of one random pose, placed in camera coordinates.

    Raises:
        BehindCameraError: If a joint ends up closer than ``min_depth_mm``.
    """
    specs = config.joint_specs(topo)
    lengths = profile.lengths_array()

    yaw = _uniform(rng, config.root_yaw_deg)
    tilt_x = _uniform(rng, config.root_tilt_deg)
    tilt_z = _uniform(rng, config.root_tilt_deg)
    orientation = [Rotation.identity()] * topo.joint_count
    orientation[topo.root_index] = BODY_TO_CAMERA * Rotation.from_euler(
        "yxz", [yaw, tilt_x, tilt_z], degrees=True
    )

    pose = np.zeros((topo.joint_count, 3))
    for joint in topo.solve_order:
        spec = specs[joint]
        limits = np.asarray(spec.angle_limits_deg) * angle_scale
        angles = rng.uniform(limits[:, 0], limits[:, 1])
        parent = topo.parent[joint]
        orientation[joint] = orientation[parent] * Rotation.from_euler("xyz", angles, degrees=True)
        bone = orientation[joint].apply(np.asarray(spec.rest_direction))
        pose[joint] = pose[parent] + lengths[topo.bone_index(joint)] * bone

    root = np.array(
        [
            _uniform(rng, config.root_lateral_mm),
            _uniform(rng, config.root_vertical_mm),
            _uniform(rng, config.root_depth_mm),
        ]
    )
    pose += root

    nearest = int(np.argmin(pose[:, 2]))
    if pose[nearest, 2] < config.min_depth_mm:
        raise BehindCameraError(joint=nearest, depth=float(pose[nearest, 2]))
    return pose


def generate_sample(
    profile: SubjectProfile,
    subject_index: int,
    sample_index: int,
    topo: SkeletonTopology,
    camera_pool: list[CameraIntrinsics],
    noise_px: float,
    seed: int,
    config: GenerationConfig,
) -> SampleRecord:
    """Generate one sample, redrawing the pose while it lands behind the camera.

    Raises:
        GenerationError: If every attempt placed a joint behind the camera.
    """
    rng = make_rng((seed, 1, subject_index, sample_index))
    action = config.actions[sample_index % len(config.actions)]
    camera = camera_pool[int(rng.integers(len(camera_pool)))]

    @retry(
        retry=retry_if_exception_type(BehindCameraError),
        stop=stop_after_attempt(config.max_retries),
        before_sleep=before_sleep_log(logger, logging.DEBUG),
        reraise=True,
    )
    def _observe() -> tuple[Pose3D, FloatArray]:
        joints_3d = pose_subject(profile, topo, config, rng, action.angle_scale)
        return joints_3d, project(joints_3d, camera)

    try:
        joints_3d, joints_2d = _observe()
    except BehindCameraError as e:
        raise GenerationError(profile.subject_id, sample_index, config.max_retries) from e

    if noise_px > 0:
        joints_2d = joints_2d + rng.normal(0.0, noise_px, size=joints_2d.shape)
    return SampleRecord(
        joints_3d=joints_3d,
        joints_2d=joints_2d,
        camera=camera,
        subject_id=profile.subject_id,
        action_id=action.name,
    )


def generate_synthetic(
    n_subjects: int,
    samples_per_subject: int,
    topo: SkeletonTopology,
    camera_pool: list[CameraIntrinsics] | None = None,
    noise_px: float = 0.0,
    seed: int = 0,
    config: GenerationConfig | None = None,
) -> list[SampleRecord]:
    """Generate a synthetic dataset, subject by subject.

    Args:
        n_subjects: Number of subjects, labelled S1..Sn.
        samples_per_subject: Samples per subject.
        topo: Skeleton topology; every joint name needs a spec in the config.
        camera_pool: Cameras to observe with; defaults to the config's pool.
        noise_px: Standard deviation of Gaussian 2D noise in pixels.
        seed: Master seed.
        config: Generation config; defaults to the packaged one.

    Returns:
        Records ordered by subject, then sample index.

    Raises:
        InvalidInputError: On non-positive counts, negative noise or an empty pool.
        GenerationError: If a sample cannot be placed in front of the camera.
    """
    if n_subjects < 1 or samples_per_subject < 1:
        raise InvalidInputError("Subject and sample counts must be positive.")
    if noise_px < 0:
        raise InvalidInputError(f"Noise must be non-negative, got {noise_px}.")
    config = config or load_generation_config()
    pool = camera_pool if camera_pool is not None else config.camera_pool()
    if not pool:
        raise InvalidInputError("Camera pool is empty.")

    records: list[SampleRecord] = []
    for s in range(n_subjects):
        profile = make_subject_profile(s, topo, config, seed)
        for i in range(samples_per_subject):
            records.append(generate_sample(profile, s, i, topo, pool, noise_px, seed, config))
    logger.info(
        "Generated %d samples for %d subjects (seed %d, noise %.3g px)",
        len(records),
        n_subjects,
        seed,
        noise_px,
    )
    return records
