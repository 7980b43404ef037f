"""Prior-augmented input assembly and the 2D-to-3D pose regressor."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from prior_lift.camera.intrinsics import CameraFeatures, camera_features
from prior_lift.core.network import (
    FloatArray,
    ForwardMode,
    LiftingMLP,
    NetworkConfig,
    build_network,
    net_forward,
)
from prior_lift.core.rng import Rng
from prior_lift.data.records import SampleRecord, stack_poses
from prior_lift.data.stats import DatasetStats
from prior_lift.errors import InvalidInputError, VariantMismatchError
from prior_lift.skeleton.topology import Pose3D, SkeletonTopology, bone_lengths, root_center

CAMERA_WIDTHS = (3, 4)


class InputVariant(Enum):
    """Which priors are appended to the 2D joints."""

    JOINTS_ONLY = "joints_only"
    JOINTS_CAMERA = "joints_camera"
    JOINTS_BONES = "joints_bones"
    JOINTS_CAMERA_BONES = "joints_camera_bones"

    @property
    def uses_camera(self) -> bool:
        """Whether camera features are part of the input."""
        return self in (InputVariant.JOINTS_CAMERA, InputVariant.JOINTS_CAMERA_BONES)

    @property
    def uses_bones(self) -> bool:
        """Whether bone lengths are part of the input."""
        return self in (InputVariant.JOINTS_BONES, InputVariant.JOINTS_CAMERA_BONES)

    def width(self, topo: SkeletonTopology, camera_width: int = 4) -> int:
        """Input width: 2J, plus B for bones, plus the camera width."""
        width = 2 * topo.joint_count
        if self.uses_bones:
            width += topo.bone_count
        if self.uses_camera:
            width += camera_width
        return width


def _camera_rows(
    camera: CameraFeatures | FloatArray,
    rows: int,
    camera_width: int,
) -> FloatArray:
    if isinstance(camera, CameraFeatures):
        values = camera.as_array(camera_width)
    else:
        values = np.asarray(camera, dtype=np.float64)
    values = np.atleast_2d(values)
    if values.shape[1] != camera_width:
        raise InvalidInputError(
            f"Camera features have width {values.shape[1]}, expected {camera_width}."
        )
    return np.broadcast_to(values, (rows, camera_width))


def assemble_input(
    joints_2d: FloatArray,
    lengths: FloatArray | None,
    camera: CameraFeatures | FloatArray | None,
    stats: DatasetStats,
    variant: InputVariant,
    camera_width: int = 4,
) -> FloatArray:
    """Concatenate standardized 2D joints, standardized bone lengths and camera features.

    Components the variant does not use are ignored even when given. Camera
    features are used as they are, already normalized.

    Args:
        joints_2d: Pixel joints (J, 2) or (N, J, 2).
        lengths: Bone lengths (B,) or (N, B) in millimeters.
        camera: One CameraFeatures for all rows, or rows (N, camera_width).
        stats: Training-split statistics.
        variant: Input variant.
        camera_width: 4 for separate focal lengths, 3 for their mean.

    Returns:
        Feature rows (N, width).

    Raises:
        InvalidInputError: If a required component is missing or a width disagrees.
    """
    if camera_width not in CAMERA_WIDTHS:
        raise InvalidInputError(f"Camera width must be 3 or 4, got {camera_width}.")
    joints_2d = np.asarray(joints_2d, dtype=np.float64)
    if joints_2d.ndim == 2:
        joints_2d = joints_2d[None]
    if joints_2d.ndim != 3 or joints_2d.shape[1:] != (stats.joint_count, 2):
        raise InvalidInputError(
            f"Expected 2D joints (N, {stats.joint_count}, 2), got {joints_2d.shape}."
        )
    rows = joints_2d.shape[0]
    parts = [stats.standardize_2d(joints_2d)]

    if variant.uses_bones:
        if lengths is None:
            raise InvalidInputError(f"Variant {variant.value} needs bone lengths.")
        lengths = np.atleast_2d(np.asarray(lengths, dtype=np.float64))
        if lengths.shape != (rows, stats.mean_bones.size):
            raise InvalidInputError(
                f"Expected bone lengths ({rows}, {stats.mean_bones.size}), got {lengths.shape}."
            )
        parts.append(stats.standardize_bones(lengths))

    if variant.uses_camera:
        if camera is None:
            raise InvalidInputError(f"Variant {variant.value} needs camera features.")
        parts.append(_camera_rows(camera, rows, camera_width))

    features = np.concatenate(parts, axis=1)
    if not np.all(np.isfinite(features)):
        raise InvalidInputError("Assembled features are not finite.")
    return features


@dataclass
class LiftingNetwork:
    """Regressor from assembled features to root-relative poses.

    Args:
        mlp: The dense network.
        variant: Input variant the network was built for.
        stats: Statistics of its training split.
        topology: Skeleton topology.
        camera_width: Camera feature width (3 or 4).
    """

    mlp: LiftingMLP
    variant: InputVariant
    stats: DatasetStats
    topology: SkeletonTopology
    camera_width: int = 4

    @property
    def input_width(self) -> int:
        """Feature width expected by the network."""
        return self.variant.width(self.topology, self.camera_width)

    def features(self, records: list[SampleRecord]) -> FloatArray:
        """Feature rows for records; bone lengths come from their ground truth."""
        check_compatibility(self, records)
        joints_3d, joints_2d = stack_poses(records)
        lengths = bone_lengths(joints_3d, self.topology) if self.variant.uses_bones else None
        cameras = None
        if self.variant.uses_camera:
            cameras = np.stack(
                [camera_features(r.camera).as_array(self.camera_width) for r in records]
            )
        return assemble_input(
            joints_2d, lengths, cameras, self.stats, self.variant, self.camera_width
        )

    def targets(self, records: list[SampleRecord]) -> FloatArray:
        """Standardized root-relative ground truth rows (N, 3J)."""
        joints_3d, _ = stack_poses(records)
        return self.stats.standardize_3d(root_center(joints_3d, self.topology))

    def predict(self, features: FloatArray) -> Pose3D:
        """Root-relative poses (N, J, 3) in millimeters for feature rows."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.input_width:
            raise InvalidInputError(
                f"Feature width {features.shape[1]} != network input width {self.input_width}."
            )
        output, _ = net_forward(self.mlp, features, ForwardMode.EVAL)
        poses = self.stats.destandardize_3d(output)
        poses[:, self.topology.root_index, :] = 0.0
        return poses


def predict_pose(
    net: LiftingNetwork,
    feature: FloatArray,
    stats: DatasetStats | None = None,
) -> Pose3D:
    """Predict one root-relative pose (J, 3), or a batch (N, J, 3) for 2D input.

    ``stats`` overrides the network's own statistics for de-standardization.
    """
    feature = np.asarray(feature, dtype=np.float64)
    if stats is not None and stats is not net.stats:
        net = LiftingNetwork(net.mlp, net.variant, stats, net.topology, net.camera_width)
    poses = net.predict(feature)
    return poses[0] if feature.ndim == 1 else poses


def build_lifting_network(
    variant: InputVariant,
    topo: SkeletonTopology,
    stats: DatasetStats,
    rng: Rng | None,
    hidden_size: int = 1024,
    num_blocks: int = 2,
    keep_prob: float = 0.5,
    bn_momentum: float = 0.1,
    camera_width: int = 4,
) -> LiftingNetwork:
    """Create a freshly initialized regressor sized for the variant."""
    if camera_width not in CAMERA_WIDTHS:
        raise InvalidInputError(f"Camera width must be 3 or 4, got {camera_width}.")
    config = NetworkConfig(
        input_size=variant.width(topo, camera_width),
        output_size=3 * topo.joint_count,
        hidden_size=hidden_size,
        num_blocks=num_blocks,
        keep_prob=keep_prob,
        bn_momentum=bn_momentum,
    )
    return LiftingNetwork(
        mlp=build_network(config, rng),
        variant=variant,
        stats=stats,
        topology=topo,
        camera_width=camera_width,
    )


def check_compatibility(net: LiftingNetwork, records: list[SampleRecord]) -> None:
    """Check that records carry what the network's variant and topology need.

    Raises:
        VariantMismatchError: On a joint-count mismatch or missing cameras.
    """
    if net.mlp.config.input_size != net.input_width:
        raise VariantMismatchError(
            f"Network input width {net.mlp.config.input_size} does not fit variant "
            f"{net.variant.value} (width {net.input_width})."
        )
    for index, record in enumerate(records):
        if record.joints_2d.shape[0] != net.topology.joint_count:
            raise VariantMismatchError(
                f"Record {index} has {record.joints_2d.shape[0]} joints, "
                f"network expects {net.topology.joint_count}."
            )
        if net.variant.uses_camera and record.camera is None:
            raise VariantMismatchError(
                f"Variant {net.variant.value} needs camera intrinsics; record {index} has none."
            )
