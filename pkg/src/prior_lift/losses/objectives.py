"""Coordinate MSE, bone direction loss and their weighted sum.

Every loss returns ``(value, gradient)`` where the gradient has the shape of
the prediction, so the trainer can hand it straight to the network.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from prior_lift.data.stats import DatasetStats
from prior_lift.errors import InvalidInputError
from prior_lift.skeleton.topology import FloatArray, Pose3D, SkeletonTopology, bone_directions

DirectionReduction = Literal["component", "bone"]


@dataclass(frozen=True)
class LossWeights:
    """Weights of the coordinate and direction terms.

    Args:
        w_mse: Weight of the standardized-coordinate MSE, >= 0.
        w_dir: Weight of the direction loss, >= 0.
    """

    w_mse: float = 0.5
    w_dir: float = 0.5

    def __post_init__(self) -> None:
        if self.w_mse < 0 or self.w_dir < 0:
            raise InvalidInputError(f"Loss weights must be non-negative, got {self}.")
        if self.w_mse + self.w_dir <= 0:
            raise InvalidInputError("At least one loss weight must be positive.")


@dataclass
class LossBreakdown:
    """Weighted total and its unweighted parts.

    Args:
        total: Weighted sum.
        mse: Coordinate MSE, 0 when its weight is 0.
        direction: Direction loss, 0 when its weight is 0.
        grad: Gradient of ``total`` with respect to the standardized prediction.
    """

    total: float
    mse: float
    direction: float
    grad: FloatArray


def mse_loss(pred: FloatArray, gt: FloatArray) -> tuple[float, FloatArray]:
    """Mean of squared componentwise differences and its gradient ``2 (pred - gt) / size``."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise InvalidInputError(f"Prediction shape {pred.shape} != target shape {gt.shape}.")
    diff = pred - gt
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def direction_loss(
    pred: Pose3D,
    gt: Pose3D,
    topo: SkeletonTopology,
    reduction: DirectionReduction = "component",
) -> tuple[float, Pose3D]:
    """Mean squared difference of unnormalized bone vectors.

    With ``reduction="component"`` the sum is divided by the number of
    summed scalars (samples x bones x 3); ``"bone"`` divides by samples x
    bones, giving three times the value.

    Args:
        pred: Predicted poses (..., J, 3).
        gt: Ground-truth poses of the same shape.
        topo: Skeleton topology.
        reduction: Normalization of the sum.

    Returns:
        Loss value and its gradient with respect to ``pred``.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise InvalidInputError(f"Prediction shape {pred.shape} != target shape {gt.shape}.")
    diff = bone_directions(pred, topo) - bone_directions(gt, topo)
    if reduction == "component":
        count = diff.size
    elif reduction == "bone":
        count = diff.size // 3
    else:
        raise InvalidInputError(f"Unknown direction reduction {reduction!r}.")
    value = float(np.sum(diff * diff) / count)
    # Each bone pushes +1 onto its child joint and -1 onto its parent.
    grad = np.einsum("bj,...bc->...jc", topo.incidence, 2.0 * diff / count)
    return value, grad


def combined_loss(
    pred: FloatArray,
    gt: FloatArray,
    topo: SkeletonTopology,
    weights: LossWeights,
    stats: DatasetStats | None = None,
    reduction: DirectionReduction = "component",
) -> LossBreakdown:
    """``w_mse * MSE + w_dir * direction`` on a batch of standardized targets.

    The MSE is taken on the standardized rows. The direction loss is taken
    on the millimeter poses recovered with ``stats`` and divided by
    ``stats.pose_scale``, which puts both terms in units of one standard
    deviation; without statistics it uses the rows reshaped as poses. Its
    gradient is chained back through both steps. Terms with zero weight are
    not evaluated.

    Args:
        pred: Predicted rows (N, 3J).
        gt: Target rows (N, 3J).
        topo: Skeleton topology.
        weights: Loss weights.
        stats: Statistics mapping rows to millimeters and giving the pose scale.
        reduction: Direction-loss normalization.

    Returns:
        The breakdown with the gradient with respect to ``pred``.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 3 * topo.joint_count:
        raise InvalidInputError(
            f"Expected rows (N, {3 * topo.joint_count}), got {pred.shape} and {gt.shape}."
        )

    total = 0.0
    grad = np.zeros_like(pred)
    mse_value = direction_value = 0.0

    if weights.w_mse > 0:
        mse_value, mse_grad = mse_loss(pred, gt)
        total += weights.w_mse * mse_value
        grad += weights.w_mse * mse_grad

    if weights.w_dir > 0:
        if stats is not None:
            scale = stats.pose_scale
            pred_poses = stats.destandardize_3d(pred) / scale
            gt_poses = stats.destandardize_3d(gt) / scale
        else:
            pred_poses = pred.reshape(len(pred), topo.joint_count, 3)
            gt_poses = gt.reshape(len(gt), topo.joint_count, 3)
        direction_value, dir_grad = direction_loss(pred_poses, gt_poses, topo, reduction)
        dir_grad = dir_grad.reshape(pred.shape)
        if stats is not None:
            dir_grad = dir_grad * (stats.std_3d / scale)
        total += weights.w_dir * direction_value
        grad += weights.w_dir * dir_grad

    return LossBreakdown(total=total, mse=mse_value, direction=direction_value, grad=grad)
