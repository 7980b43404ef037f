"""Tests for skeleton topology, bone lengths and bone directions."""

import numpy as np
import pytest

from prior_lift.errors import InvalidInputError
from prior_lift.skeleton.topology import (
    ROOT_PARENT,
    SkeletonTopology,
    bone_directions,
    bone_lengths,
    root_center,
)


def two_joint_topology() -> SkeletonTopology:
    return SkeletonTopology(parent=(ROOT_PARENT, 0), root_index=0)


class TestSkeletonTopology:
    """Tests for topology construction and derived properties."""

    def test_default_counts(self, topo):
        """The default skeleton has 16 joints and 15 bones."""
        assert topo.joint_count == 16
        assert topo.bone_count == 15
        assert topo.root_index == 0
        assert topo.joint_names[9] == "head"

    @pytest.mark.parametrize(
        "parent,root_index",
        [
            ((ROOT_PARENT, ROOT_PARENT, 0), 0),
            ((1, 0, 0), 0),
            ((ROOT_PARENT, 0, 5), 0),
            ((ROOT_PARENT, 2, 1), 0),
            ((ROOT_PARENT, 0, 1), 1),
            ((), 0),
        ],
    )
    def test_invalid_trees_rejected(self, parent, root_index):
        """Multiple roots, out-of-range parents, cycles and wrong roots are rejected."""
        with pytest.raises(InvalidInputError):
            SkeletonTopology(parent=parent, root_index=root_index)

    def test_joint_name_count_must_match(self):
        """A name list of the wrong length is rejected."""
        with pytest.raises(InvalidInputError):
            SkeletonTopology(parent=(ROOT_PARENT, 0), root_index=0, joint_names=("a",))

    def test_generated_names(self):
        """Missing names default to joint_<i>."""
        assert two_joint_topology().joint_names == ("joint_0", "joint_1")

    def test_bone_order_ascending_child(self, topo):
        """Bones are ordered by child index and paired with their parents."""
        assert topo.bone_children.tolist() == list(range(1, 16))
        assert topo.bone_parents.tolist() == [0, 1, 2, 0, 4, 5, 0, 7, 8, 8, 10, 11, 8, 13, 14]

    def test_incidence_matrix(self, topo):
        """Each incidence row has +1 at the child and -1 at the parent."""
        incidence = topo.incidence
        assert incidence.shape == (15, 16)
        np.testing.assert_array_equal(incidence.sum(axis=1), np.zeros(15))
        assert incidence[0, 1] == 1.0
        assert incidence[0, 0] == -1.0

    def test_solve_order_parents_first(self, topo):
        """Every joint in the solve order comes after its parent."""
        order = topo.solve_order
        assert sorted(order) == list(range(1, 16))
        seen = {topo.root_index}
        for joint in order:
            assert topo.parent[joint] in seen
            seen.add(joint)

    def test_bone_index(self, topo):
        """Bone index of a child joint follows the bone order."""
        assert topo.bone_index(1) == 0
        assert topo.bone_index(15) == 14
        with pytest.raises(InvalidInputError):
            topo.bone_index(0)

    def test_save_and_load(self, topo, tmp_path):
        """A saved topology loads back equal."""
        path = tmp_path / "topology.json"
        topo.save(path)
        assert SkeletonTopology.load(path) == topo

    def test_root_serialized_as_null(self, topo):
        """The root's parent is written as null."""
        data = topo.to_dict()
        assert data["parent"][0] is None
        assert data["joint_count"] == 16

    def test_from_dict_count_mismatch(self, topo):
        """A joint_count disagreeing with the parent array is rejected."""
        data = topo.to_dict()
        data["joint_count"] = 17
        with pytest.raises(InvalidInputError):
            SkeletonTopology.from_dict(data)


class TestBoneLengths:
    """Tests for bone_lengths."""

    @pytest.mark.parametrize(
        "child,expected",
        [
            ((0.0, 0.0, 0.0), 0.0),
            ((3.0, 4.0, 0.0), 5.0),
            ((1.0, 2.0, 2.0), 3.0),
        ],
    )
    def test_single_bone(self, child, expected):
        """Length is the norm of child minus parent."""
        pose = np.array([[0.0, 0.0, 0.0], child])
        assert bone_lengths(pose, two_joint_topology())[0] == pytest.approx(expected)

    def test_default_skeleton_shape(self, topo):
        """A 16-joint pose yields 15 non-negative lengths."""
        pose = np.random.default_rng(0).normal(size=(16, 3)) * 300.0
        lengths = bone_lengths(pose, topo)
        assert lengths.shape == (15,)
        assert np.all(lengths >= 0)

    def test_batched(self, topo):
        """Leading batch axes are preserved."""
        poses = np.random.default_rng(1).normal(size=(4, 16, 3))
        assert bone_lengths(poses, topo).shape == (4, 15)

    def test_joint_count_mismatch(self, topo):
        """A pose with the wrong joint count is rejected."""
        with pytest.raises(InvalidInputError):
            bone_lengths(np.zeros((17, 3)), topo)


class TestBoneDirections:
    """Tests for bone_directions."""

    def test_child_minus_parent(self):
        """Bone vector equals child minus parent exactly."""
        pose = np.array([[1.0, 2.0, 3.0], [4.0, 6.0, 8.0]])
        np.testing.assert_array_equal(
            bone_directions(pose, two_joint_topology()), [[3.0, 4.0, 5.0]]
        )

    def test_translation_invariant(self, topo):
        """Translating the whole pose leaves bone vectors unchanged."""
        pose = np.random.default_rng(2).normal(size=(16, 3)) * 200.0
        shifted = pose + np.array([120.0, -40.0, 3000.0])
        np.testing.assert_allclose(
            bone_directions(pose, topo), bone_directions(shifted, topo), atol=1e-9
        )

    def test_norms_are_lengths(self, topo):
        """Direction norms equal bone lengths."""
        pose = np.random.default_rng(3).normal(size=(16, 3)) * 200.0
        np.testing.assert_allclose(
            np.linalg.norm(bone_directions(pose, topo), axis=-1), bone_lengths(pose, topo)
        )


class TestRootCenter:
    """Tests for root_center."""

    def test_root_at_origin(self, topo):
        """The root becomes exactly zero and bones are unchanged."""
        pose = np.random.default_rng(4).normal(size=(16, 3)) * 200.0 + 4000.0
        centered = root_center(pose, topo)
        np.testing.assert_array_equal(centered[0], np.zeros(3))
        np.testing.assert_allclose(bone_directions(centered, topo), bone_directions(pose, topo))

    def test_idempotent(self, topo):
        """Centering a centered pose changes nothing."""
        pose = np.random.default_rng(5).normal(size=(3, 16, 3)) * 200.0 + 4000.0
        centered = root_center(pose, topo)
        np.testing.assert_array_equal(root_center(centered, topo), centered)
