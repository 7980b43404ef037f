"""Tests for Procrustes alignment."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from prior_lift.errors import DegenerateInputError, InvalidInputError
from prior_lift.geometry.procrustes import fit_similarity, procrustes_align


def random_pose(rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=(16, 3)) * 250.0


class TestProcrustesAlign:
    """Tests for procrustes_align and fit_similarity."""

    @pytest.mark.parametrize("with_scale", [True, False])
    def test_recovers_rigid_motion(self, with_scale):
        """A rotated and translated copy aligns back to within 1e-8 mm."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            gt = random_pose(rng)
            rotation = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
            pred = gt @ rotation + rng.uniform(-1000.0, 1000.0, size=3)
            aligned = procrustes_align(pred, gt, with_scale=with_scale)
            assert np.abs(aligned - gt).max() < 1e-8

    def test_recovers_similarity(self):
        """A scaled, rotated and translated copy aligns back when scale is enabled."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            gt = random_pose(rng)
            rotation = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
            pred = rng.uniform(0.5, 2.0) * gt @ rotation + rng.uniform(-500.0, 500.0, size=3)
            assert np.abs(procrustes_align(pred, gt) - gt).max() < 1e-8

    def test_doubled_pose(self):
        """2 * gt aligns to gt only with scale."""
        gt = random_pose(np.random.default_rng(2))
        assert np.abs(procrustes_align(2.0 * gt, gt) - gt).max() < 1e-8
        assert np.abs(procrustes_align(2.0 * gt, gt, with_scale=False) - gt).max() > 1.0

    def test_never_reflects(self):
        """A mirrored pose is aligned with a proper rotation."""
        gt = random_pose(np.random.default_rng(3))
        mirrored = gt * np.array([-1.0, 1.0, 1.0])
        transform = fit_similarity(mirrored, gt)
        assert np.linalg.det(transform.rotation) == pytest.approx(1.0)

    def test_reduces_squared_error(self):
        """Alignment never increases the summed squared distance."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            gt = random_pose(rng)
            pred = random_pose(rng)
            aligned = procrustes_align(pred, gt)
            assert np.sum((aligned - gt) ** 2) <= np.sum((pred - gt) ** 2) + 1e-6

    @pytest.mark.parametrize(
        "pred",
        [
            np.zeros((16, 3)),
            np.outer(np.arange(16.0), [1.0, 2.0, 3.0]),
        ],
    )
    def test_degenerate(self, pred):
        """Coincident or collinear joints have no unique alignment."""
        gt = random_pose(np.random.default_rng(5))
        with pytest.raises(DegenerateInputError):
            fit_similarity(pred, gt)

    @pytest.mark.parametrize(
        "pred,gt",
        [
            (np.zeros((16, 3)), np.zeros((15, 3))),
            (np.ones((2, 3)), np.ones((2, 3))),
            (np.ones((16, 2)), np.ones((16, 2))),
        ],
    )
    def test_invalid_shapes(self, pred, gt):
        """Mismatched shapes, fewer than 3 joints and 2D points are rejected."""
        with pytest.raises(InvalidInputError):
            fit_similarity(pred, gt)

    @pytest.mark.parametrize("with_scale", [True, False])
    def test_invariant_to_rigid_motion_of_pred(self, with_scale):
        """Moving the prediction rigidly before alignment leaves the aligned pose unchanged."""
        rng = np.random.default_rng(6)
        for _ in range(20):
            gt = random_pose(rng)
            pred = gt + rng.normal(size=gt.shape) * 40.0
            rotation = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
            moved = pred @ rotation + rng.uniform(-1000.0, 1000.0, size=3)
            expected = procrustes_align(pred, gt, with_scale=with_scale)
            aligned = procrustes_align(moved, gt, with_scale=with_scale)
            assert np.abs(aligned - expected).max() < 1e-8
            error = np.linalg.norm(aligned - gt, axis=-1).mean()
            assert error == pytest.approx(np.linalg.norm(expected - gt, axis=-1).mean(), abs=1e-8)
