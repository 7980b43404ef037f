"""Closed-form least-squares alignment of one pose onto another."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from prior_lift.errors import DegenerateInputError, InvalidInputError
from prior_lift.skeleton.topology import Pose3D

RANK_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SimilarityTransform:
    """Row-vector transform ``x -> scale * x @ rotation + translation``.

    Args:
        rotation: Proper rotation (3, 3), determinant +1.
        scale: Isotropic scale, 1 for rigid alignment.
        translation: Translation (3,).
    """

    rotation: npt.NDArray[np.float64]
    scale: float
    translation: npt.NDArray[np.float64]

    def apply(self, points: Pose3D) -> Pose3D:
        """Transform points (..., 3)."""
        return self.scale * (np.asarray(points) @ self.rotation) + self.translation


def fit_similarity(pred: Pose3D, gt: Pose3D, with_scale: bool = True) -> SimilarityTransform:
    """Fit the rotation, translation and optional scale taking ``pred`` closest to ``gt``.

    Uses the singular value decomposition of the cross-covariance; the
    smallest singular direction is sign-corrected so the result is never a
    reflection.

    Raises:
        InvalidInputError: If shapes differ or there are fewer than 3 joints.
        DegenerateInputError: If the joints are collinear or coincident.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 3:
        raise InvalidInputError(f"Expected two (J, 3) poses, got {pred.shape} and {gt.shape}.")
    if pred.shape[0] < 3:
        raise InvalidInputError("Alignment needs at least 3 joints.")

    mu_pred = pred.mean(axis=0)
    mu_gt = gt.mean(axis=0)
    y0 = pred - mu_pred
    x0 = gt - mu_gt

    cross = y0.T @ x0
    u, s, vt = np.linalg.svd(cross)
    if s[0] <= 0.0 or s[1] <= RANK_TOLERANCE * s[0]:
        raise DegenerateInputError(
            "Cross-covariance is rank deficient; joints are collinear or coincident."
        )

    signs = np.ones(3)
    if np.linalg.det(u @ vt) < 0:
        signs[-1] = -1.0
    rotation = (u * signs) @ vt

    scale = 1.0
    if with_scale:
        scale = float(np.sum(s * signs) / np.sum(y0 * y0))
    translation = mu_gt - scale * (mu_pred @ rotation)
    return SimilarityTransform(rotation=rotation, scale=scale, translation=translation)


def procrustes_align(pred: Pose3D, gt: Pose3D, with_scale: bool = True) -> Pose3D:
    """Return ``pred`` after the least-squares similarity (or rigid) fit onto ``gt``."""
    transform = fit_similarity(pred, gt, with_scale=with_scale)
    return transform.apply(pred)
