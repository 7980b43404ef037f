"""Tests for pose error metrics and evaluation reports."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from prior_lift.core.rng import make_rng
from prior_lift.data.stats import compute_stats
from prior_lift.errors import DegenerateInputError, InvalidInputError
from prior_lift.model.lifting import InputVariant, build_lifting_network
from prior_lift.training.evaluation import (
    evaluate,
    joint_errors,
    mpjpe,
    p_mpjpe,
    summarize_errors,
)


@pytest.fixture
def gt() -> np.ndarray:
    """A random pose of 16 joints."""
    return np.random.default_rng(0).normal(size=(16, 3)) * 200.0


class TestMpjpe:
    """Tests for joint_errors and mpjpe."""

    def test_identical(self, gt):
        """A perfect prediction has zero error."""
        assert mpjpe(gt, gt.copy()) == 0.0

    def test_uniform_offset(self, gt):
        """Moving every joint by 3 mm gives 3 mm."""
        assert mpjpe(gt + np.array([0.0, 3.0, 0.0]), gt) == pytest.approx(3.0)

    def test_half_offset(self, gt):
        """Moving half the joints by 3 mm gives 1.5 mm."""
        pred = gt.copy()
        pred[:8, 2] += 3.0
        assert mpjpe(pred, gt) == pytest.approx(1.5)

    def test_symmetric(self, gt):
        """Swapping prediction and ground truth changes nothing."""
        pred = gt + np.random.default_rng(1).normal(size=gt.shape) * 10.0
        assert mpjpe(pred, gt) == mpjpe(gt, pred)

    def test_joint_errors_shape(self, gt):
        """One distance per joint, with batch axes kept."""
        batch = np.stack([gt, gt + 1.0])
        errors = joint_errors(batch, np.stack([gt, gt]))
        assert errors.shape == (2, 16)
        np.testing.assert_allclose(errors[1], np.sqrt(3.0))

    def test_shape_mismatch(self, gt):
        """Poses must have the same shape."""
        with pytest.raises(InvalidInputError):
            mpjpe(gt[:15], gt)


class TestPMpjpe:
    """Tests for p_mpjpe."""

    def test_rotated_copy(self, gt):
        """A rotated and shifted copy scores zero after alignment."""
        rotation = Rotation.from_rotvec([0.3, -1.1, 0.4]).as_matrix()
        pred = gt @ rotation + np.array([50.0, -20.0, 10.0])
        assert p_mpjpe(pred, gt) < 1e-8
        assert p_mpjpe(pred, gt, with_scale=False) < 1e-8

    def test_scaled_copy(self, gt):
        """Only similarity alignment removes a scale error."""
        assert p_mpjpe(1.5 * gt, gt) < 1e-8
        assert p_mpjpe(1.5 * gt, gt, with_scale=False) > 1.0

    def test_degenerate(self, gt):
        """A collapsed prediction cannot be aligned."""
        with pytest.raises(DegenerateInputError):
            p_mpjpe(np.zeros_like(gt), gt)


class TestSummarizeErrors:
    """Tests for summarize_errors."""

    def test_per_action(self, gt):
        """Metrics are grouped by action, sorted by name."""
        truths = np.stack([gt, gt, gt])
        predictions = truths.copy()
        predictions[2] += np.array([3.0, 0.0, 0.0])
        report = summarize_errors(predictions, truths, ["walking", "sitting", "walking"])
        assert list(report.per_action) == ["sitting", "walking"]
        assert report.per_action["sitting"].mpjpe_mm == 0.0
        assert report.per_action["walking"].mpjpe_mm == pytest.approx(1.5)
        assert report.per_action["walking"].sample_count == 2
        assert report.mpjpe_mm == pytest.approx(1.0)
        assert report.sample_count == 3
        assert report.alignment_violations == 0

    def test_degenerate_scored_unaligned(self, gt):
        """A sample with no unique alignment keeps its unaligned error."""
        truths = np.stack([gt, gt])
        predictions = np.stack([gt, np.zeros_like(gt)])
        report = summarize_errors(predictions, truths, ["a", "a"])
        assert report.degenerate_alignments == 1
        assert report.p_mpjpe_mm == pytest.approx(report.mpjpe_mm)

    def test_action_count_mismatch(self, gt):
        """Each sample needs an action label."""
        with pytest.raises(InvalidInputError):
            summarize_errors(gt[None], gt[None], [])

    def test_to_dict(self, gt):
        """The report serializes with nested per-action entries."""
        data = summarize_errors(gt[None], gt[None], ["a"]).to_dict()
        assert data["per_action"]["a"]["sample_count"] == 1
        assert set(data) >= {"mpjpe_mm", "p_mpjpe_mm", "p_mpjpe_rigid_mm", "sample_count"}


class TestEvaluate:
    """Tests for evaluate."""

    def test_report(self, synthetic_records, topo):
        """Every record is scored."""
        stats = compute_stats(synthetic_records, topo)
        net = build_lifting_network(InputVariant.JOINTS_CAMERA, topo, stats, make_rng(0), 8, 1)
        report = evaluate(net, synthetic_records)
        assert report.sample_count == len(synthetic_records)
        assert report.mpjpe_mm > 0.0
        assert sum(m.sample_count for m in report.per_action.values()) == 24

    def test_empty(self, synthetic_records, topo):
        """An empty split cannot be evaluated."""
        stats = compute_stats(synthetic_records, topo)
        net = build_lifting_network(InputVariant.JOINTS_ONLY, topo, stats, make_rng(0), 8, 1)
        with pytest.raises(InvalidInputError):
            evaluate(net, [])
