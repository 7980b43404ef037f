"""Pytest fixtures for prior_lift tests."""

import pytest

from prior_lift.camera.intrinsics import CameraIntrinsics
from prior_lift.data.records import SampleRecord
from prior_lift.data.synthetic import generate_synthetic
from prior_lift.skeleton.topology import SkeletonTopology, default_topology
from prior_lift.training.trainer import TrainConfig


@pytest.fixture
def topo() -> SkeletonTopology:
    """The default 16-joint skeleton."""
    return default_topology()


@pytest.fixture
def square_camera() -> CameraIntrinsics:
    """A 1000x1000 camera with a centered principal point."""
    return CameraIntrinsics(fx=1145.0, fy=1143.8, cx=500.0, cy=500.0, res_w=1000, res_h=1000)


@pytest.fixture
def wide_camera() -> CameraIntrinsics:
    """A 1920x1080 camera with an off-center principal point."""
    return CameraIntrinsics(fx=1400.0, fy=1380.0, cx=980.0, cy=530.0, res_w=1920, res_h=1080)


@pytest.fixture
def synthetic_records(topo: SkeletonTopology) -> list[SampleRecord]:
    """Noiseless samples of three subjects, eight each."""
    return generate_synthetic(n_subjects=3, samples_per_subject=8, topo=topo, seed=0)


@pytest.fixture
def split_records(
    synthetic_records: list[SampleRecord],
) -> tuple[list[SampleRecord], list[SampleRecord]]:
    """Subjects S1 and S2 for training, S3 for testing."""
    train = [r for r in synthetic_records if r.subject_id != "S3"]
    test = [r for r in synthetic_records if r.subject_id == "S3"]
    return train, test


@pytest.fixture
def tiny_config() -> TrainConfig:
    """A training config small enough for unit tests."""
    return TrainConfig(
        epochs=2,
        batch_size=8,
        hidden_size=16,
        num_blocks=1,
        keep_prob=0.9,
        seed=0,
    )
