"""MPJPE and Procrustes-aligned MPJPE, overall and per action."""

from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from prior_lift.data.records import SampleRecord, stack_poses
from prior_lift.errors import DegenerateInputError, InvalidInputError
from prior_lift.geometry.procrustes import procrustes_align
from prior_lift.logging import get_logger
from prior_lift.model.lifting import LiftingNetwork
from prior_lift.skeleton.topology import FloatArray, Pose3D, root_center

logger = get_logger("evaluation")

ALIGNMENT_SLACK_MM = 1e-9


def _check_pair(pred: Pose3D, gt: Pose3D) -> tuple[Pose3D, Pose3D]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim < 2 or pred.shape[-1] != 3:
        raise InvalidInputError(
            f"Expected matching (..., J, 3) poses, got {pred.shape} and {gt.shape}."
        )
    return pred, gt


def joint_errors(pred: Pose3D, gt: Pose3D) -> FloatArray:
    """Euclidean distance per joint, shape (..., J)."""
    pred, gt = _check_pair(pred, gt)
    return np.linalg.norm(pred - gt, axis=-1)


def mpjpe(pred: Pose3D, gt: Pose3D) -> float:
    """Mean per-joint position error in millimeters, averaged over every joint given."""
    return float(np.mean(joint_errors(pred, gt)))


def p_mpjpe(pred: Pose3D, gt: Pose3D, with_scale: bool = True) -> float:
    """MPJPE of one pose after least-squares alignment onto the ground truth.

    Raises:
        DegenerateInputError: If the alignment is not unique.
    """
    pred, gt = _check_pair(pred, gt)
    return mpjpe(procrustes_align(pred, gt, with_scale=with_scale), gt)


@dataclass
class ActionMetrics:
    """Errors of one action, in millimeters."""

    mpjpe_mm: float
    p_mpjpe_mm: float
    p_mpjpe_rigid_mm: float
    sample_count: int


@dataclass
class EvalReport:
    """Evaluation of a network on a split.

    Args:
        mpjpe_mm: Mean per-joint error without alignment.
        p_mpjpe_mm: Mean error after similarity alignment.
        p_mpjpe_rigid_mm: Mean error after rotation and translation only.
        per_action: The same metrics per action label.
        sample_count: Number of evaluated samples.
        alignment_violations: Samples whose aligned error exceeds the unaligned one.
        degenerate_alignments: Samples with no unique alignment, scored unaligned.
    """

    mpjpe_mm: float
    p_mpjpe_mm: float
    p_mpjpe_rigid_mm: float
    per_action: dict[str, ActionMetrics] = field(default_factory=dict)
    sample_count: int = 0
    alignment_violations: int = 0
    degenerate_alignments: int = 0

    def to_dict(self) -> dict:
        """JSON-ready form."""
        return asdict(self)


def _aligned_errors(
    predictions: Pose3D,
    truths: Pose3D,
    unaligned: FloatArray,
    with_scale: bool,
) -> tuple[FloatArray, int]:
    errors = np.empty(len(predictions))
    degenerate = 0
    for i, (pred, gt) in enumerate(zip(predictions, truths, strict=True)):
        try:
            errors[i] = p_mpjpe(pred, gt, with_scale=with_scale)
        except DegenerateInputError:
            errors[i] = unaligned[i]
            degenerate += 1
    return errors, degenerate


def summarize_errors(
    predictions: Pose3D,
    truths: Pose3D,
    actions: list[str],
) -> EvalReport:
    """Build a report from root-relative predictions and ground truth (N, J, 3)."""
    predictions, truths = _check_pair(predictions, truths)
    if len(actions) != len(predictions):
        raise InvalidInputError("Need one action label per sample.")
    unaligned = joint_errors(predictions, truths).mean(axis=-1)
    scaled, degenerate = _aligned_errors(predictions, truths, unaligned, with_scale=True)
    rigid, _ = _aligned_errors(predictions, truths, unaligned, with_scale=False)

    violations = int(np.count_nonzero(scaled > unaligned + ALIGNMENT_SLACK_MM))
    if violations:
        logger.warning(
            "%d of %d samples have a larger error after alignment than before",
            violations,
            len(predictions),
        )
    if degenerate:
        logger.warning("%d samples could not be aligned and were scored unaligned", degenerate)

    by_action: dict[str, list[int]] = defaultdict(list)
    for index, action in enumerate(actions):
        by_action[action].append(index)
    per_action = {
        action: ActionMetrics(
            mpjpe_mm=float(np.mean(unaligned[indices])),
            p_mpjpe_mm=float(np.mean(scaled[indices])),
            p_mpjpe_rigid_mm=float(np.mean(rigid[indices])),
            sample_count=len(indices),
        )
        for action, indices in sorted(by_action.items())
    }
    return EvalReport(
        mpjpe_mm=float(np.mean(unaligned)),
        p_mpjpe_mm=float(np.mean(scaled)),
        p_mpjpe_rigid_mm=float(np.mean(rigid)),
        per_action=per_action,
        sample_count=len(predictions),
        alignment_violations=violations,
        degenerate_alignments=degenerate,
    )


def evaluate(net: LiftingNetwork, records: list[SampleRecord]) -> EvalReport:
    """Predict every record in eval mode and score it against its root-relative ground truth."""
    if not records:
        raise InvalidInputError("Cannot evaluate an empty split.")
    predictions = net.predict(net.features(records))
    joints_3d, _ = stack_poses(records)
    truths = root_center(joints_3d, net.topology)
    return summarize_errors(predictions, truths, [record.action_id for record in records])
