"""Articulated skeleton topology, bone lengths and bone direction vectors.

Poses are numpy arrays whose last two axes are (joints, coordinates):
``(..., J, 3)`` for 3D poses in millimeters and ``(..., J, 2)`` for 2D poses
in pixels. Every function here accepts leading batch axes.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import numpy.typing as npt

from prior_lift.errors import InvalidInputError

FloatArray = npt.NDArray[np.float64]
Pose3D = FloatArray
Pose2D = FloatArray

ROOT_PARENT = -1

DEFAULT_JOINT_NAMES = (
    "hip",
    "r_hip",
    "r_knee",
    "r_ankle",
    "l_hip",
    "l_knee",
    "l_ankle",
    "spine",
    "thorax",
    "head",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
)

DEFAULT_PARENTS = (-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 8, 10, 11, 8, 13, 14)


@dataclass(frozen=True)
class SkeletonTopology:
    """Joint tree defining bones and direction pairs.

    Bones are ordered by ascending child-joint index; bone ``i`` connects
    ``bone_children[i]`` to its parent ``bone_parents[i]``.

    Args:
        parent: Parent index per joint; the root carries ``ROOT_PARENT``.
        root_index: Index of the root joint.
        joint_names: One label per joint.
    """

    parent: tuple[int, ...]
    root_index: int
    joint_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        count = len(self.parent)
        if count < 1:
            raise InvalidInputError("Topology needs at least one joint.")
        if not self.joint_names:
            object.__setattr__(self, "joint_names", tuple(f"joint_{i}" for i in range(count)))
        if len(self.joint_names) != count:
            raise InvalidInputError(
                f"Got {len(self.joint_names)} joint names for {count} joints."
            )

        roots = [i for i, p in enumerate(self.parent) if p == ROOT_PARENT]
        if len(roots) != 1:
            raise InvalidInputError(f"Topology must have exactly one root, found {len(roots)}.")
        if roots[0] != self.root_index:
            raise InvalidInputError(
                f"root_index {self.root_index} does not carry the root sentinel."
            )
        for joint, p in enumerate(self.parent):
            if p != ROOT_PARENT and not 0 <= p < count:
                raise InvalidInputError(f"Joint {joint} has out-of-range parent {p}.")

        # Every joint must reach the root in fewer than `count` hops.
        for joint in range(count):
            current, hops = joint, 0
            while current != self.root_index:
                current = self.parent[current]
                hops += 1
                if hops >= count:
                    raise InvalidInputError(f"Parent relation has a cycle through joint {joint}.")

    @property
    def joint_count(self) -> int:
        """Number of joints."""
        return len(self.parent)

    @property
    def bone_count(self) -> int:
        """Number of bones, always joint_count - 1."""
        return self.joint_count - 1

    @cached_property
    def bone_children(self) -> npt.NDArray[np.intp]:
        """Child joint of each bone, ascending."""
        return np.array(
            [j for j in range(self.joint_count) if j != self.root_index], dtype=np.intp
        )

    @cached_property
    def bone_parents(self) -> npt.NDArray[np.intp]:
        """Parent joint of each bone, aligned with bone_children."""
        return np.array([self.parent[j] for j in self.bone_children], dtype=np.intp)

    @cached_property
    def incidence(self) -> FloatArray:
        """Bone-by-joint matrix with +1 at the child and -1 at the parent."""
        matrix = np.zeros((self.bone_count, self.joint_count))
        rows = np.arange(self.bone_count)
        matrix[rows, self.bone_children] = 1.0
        matrix[rows, self.bone_parents] = -1.0
        return matrix

    @cached_property
    def solve_order(self) -> tuple[int, ...]:
        """Non-root joints in breadth-first order, parents before children."""
        children: dict[int, list[int]] = {j: [] for j in range(self.joint_count)}
        for j in self.bone_children:
            children[self.parent[j]].append(int(j))
        order: list[int] = []
        frontier = [self.root_index]
        while frontier:
            nxt: list[int] = []
            for joint in frontier:
                kids = sorted(children[joint])
                order.extend(kids)
                nxt.extend(kids)
            frontier = nxt
        return tuple(order)

    def bone_index(self, child: int) -> int:
        """Position of the bone ending at ``child`` in bone order."""
        if child == self.root_index:
            raise InvalidInputError("The root joint does not end a bone.")
        return child if child < self.root_index else child - 1

    def to_dict(self) -> dict:
        """Serialize as {joint_count, parent[], root_index, joint_names[]}."""
        return {
            "joint_count": self.joint_count,
            "parent": [None if p == ROOT_PARENT else p for p in self.parent],
            "root_index": self.root_index,
            "joint_names": list(self.joint_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkeletonTopology":
        """Build a topology from its JSON object form."""
        parent = tuple(ROOT_PARENT if p is None else int(p) for p in data["parent"])
        if int(data.get("joint_count", len(parent))) != len(parent):
            raise InvalidInputError("joint_count does not match the parent array length.")
        return cls(
            parent=parent,
            root_index=int(data["root_index"]),
            joint_names=tuple(data.get("joint_names", ())),
        )

    def save(self, path: Path) -> None:
        """Write the topology as JSON."""
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "SkeletonTopology":
        """Read a topology JSON file."""
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def default_topology() -> SkeletonTopology:
    """The 16-joint, 15-bone skeleton rooted at the hip."""
    return SkeletonTopology(
        parent=DEFAULT_PARENTS,
        root_index=0,
        joint_names=DEFAULT_JOINT_NAMES,
    )


def _check_joints(pose: FloatArray, topo: SkeletonTopology, dims: int = 3) -> FloatArray:
    pose = np.asarray(pose, dtype=np.float64)
    if pose.ndim < 2 or pose.shape[-2:] != (topo.joint_count, dims):
        raise InvalidInputError(
            f"Expected pose shape (..., {topo.joint_count}, {dims}), got {pose.shape}."
        )
    return pose


def bone_directions(pose: Pose3D, topo: SkeletonTopology) -> FloatArray:
    """Unnormalized bone vectors, child minus parent, shape (..., B, 3).

    Args:
        pose: Pose array (..., J, 3).
        topo: Skeleton topology.

    Returns:
        Bone vectors in bone order.

    Raises:
        InvalidInputError: If the joint count does not match the topology.
    """
    pose = _check_joints(pose, topo)
    return pose[..., topo.bone_children, :] - pose[..., topo.bone_parents, :]


def bone_lengths(pose: Pose3D, topo: SkeletonTopology) -> FloatArray:
    """Euclidean bone lengths in millimeters, shape (..., B).

    Args:
        pose: Pose array (..., J, 3).
        topo: Skeleton topology.

    Returns:
        Length of each bone in bone order.

    Raises:
        InvalidInputError: If the joint count does not match the topology.
    """
    return np.linalg.norm(bone_directions(pose, topo), axis=-1)


def root_center(pose: Pose3D, topo: SkeletonTopology) -> Pose3D:
    """Translate the pose so its root joint sits at the origin."""
    pose = _check_joints(pose, topo)
    centered = pose - pose[..., topo.root_index : topo.root_index + 1, :]
    centered[..., topo.root_index, :] = 0.0
    return centered
