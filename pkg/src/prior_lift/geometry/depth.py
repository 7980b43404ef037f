"""Analytic depth reconstruction from 2D joints and bone lengths.

Each joint lies on the ray through its pixel. Once the parent joint is
placed, the child is constrained to the sphere of radius bone length around
the parent, so it sits at one of at most two ray-sphere intersections.
Starting from a root placed at a known depth, enumerating the branches over
the tree yields a finite candidate set instead of a continuum of depths.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from prior_lift.camera.intrinsics import CameraIntrinsics, pixel_ray, project
from prior_lift.errors import InvalidInputError
from prior_lift.geometry.rays import Ray
from prior_lift.logging import get_logger
from prior_lift.skeleton.topology import Pose2D, Pose3D, SkeletonTopology, bone_lengths

logger = get_logger("geometry")

TANGENT_TOLERANCE = 1e-15


@dataclass
class CandidateSet:
    """Poses consistent with one 2D observation and one set of bone lengths.

    Args:
        poses: Candidate poses, each (J, 3) in millimeters.
        branch_count_per_joint: Most intersections found for each joint over
            all surviving partial candidates (root recorded as 1).
        truncated: Whether enumeration stopped at the candidate cap.
    """

    poses: list[Pose3D] = field(default_factory=list)
    branch_count_per_joint: list[int] = field(default_factory=list)
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.poses)

    def closest(self, pose: Pose3D) -> tuple[int, float]:
        """Index of the candidate nearest to ``pose`` and its worst per-joint distance."""
        if not self.poses:
            return -1, math.inf
        stacked = np.stack(self.poses)
        worst = np.linalg.norm(stacked - np.asarray(pose)[None], axis=-1).max(axis=-1)
        best = int(np.argmin(worst))
        return best, float(worst[best])

    def contains(self, pose: Pose3D, tolerance_mm: float = 1e-6) -> bool:
        """Whether some candidate matches ``pose`` within ``tolerance_mm`` at every joint."""
        return self.closest(pose)[1] <= tolerance_mm


def ray_sphere_intersections(
    ray: Ray,
    center: npt.ArrayLike,
    radius: float,
) -> list[float]:
    """Ray parameters where the ray meets a sphere, ascending, t > 0 only.

    Args:
        ray: Ray with unit direction.
        center: Sphere center.
        radius: Sphere radius (>= 0).

    Returns:
        Zero, one (tangency) or two parameters.
    """
    if radius < 0:
        raise InvalidInputError(f"Sphere radius must be non-negative, got {radius}.")
    center = np.asarray(center, dtype=np.float64)
    to_center = center - ray.origin
    along = float(np.dot(to_center, ray.direction))
    # Perpendicular distance form avoids cancellation in b^2 - c.
    offset = to_center - along * ray.direction
    disc = radius * radius - float(np.dot(offset, offset))
    if disc < -TANGENT_TOLERANCE * max(radius * radius, 1.0):
        return []
    if disc <= 0.0:
        roots = [along]
    else:
        half = math.sqrt(disc)
        roots = [along - half, along + half]
    return [t for t in roots if t > 0]


def chain_candidates(
    obs: Pose2D,
    lengths: npt.ArrayLike,
    intrinsics: CameraIntrinsics,
    topo: SkeletonTopology,
    root_depth: float,
    cap: int,
) -> CandidateSet:
    """Enumerate 3D poses matching 2D joints, bone lengths and a root depth.

    The root is placed at depth ``root_depth`` on its pixel ray; every other
    joint, in parent-before-child order, is intersected with the sphere around
    its placed parent. Branches with no intersection are pruned. The partial
    candidate list is cut to ``cap`` after every joint.

    Args:
        obs: Observed 2D joints (J, 2).
        lengths: Bone lengths (B,) in bone order.
        intrinsics: Camera intrinsics.
        topo: Skeleton topology.
        root_depth: z coordinate of the root in millimeters.
        cap: Maximum number of candidates kept.

    Returns:
        The candidate set.
    """
    obs = np.asarray(obs, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.float64)
    if cap <= 0:
        raise InvalidInputError(f"Candidate cap must be positive, got {cap}.")
    if root_depth <= 0:
        raise InvalidInputError(f"Root depth must be positive, got {root_depth}.")
    if obs.shape != (topo.joint_count, 2):
        raise InvalidInputError(f"Expected 2D joints of shape ({topo.joint_count}, 2).")
    if lengths.shape != (topo.bone_count,):
        raise InvalidInputError(f"Expected {topo.bone_count} bone lengths, got {lengths.shape}.")

    rays = [pixel_ray(obs[j], intrinsics) for j in range(topo.joint_count)]
    root_ray = rays[topo.root_index]
    root = root_ray.point_at(root_depth / root_ray.direction[2])

    start = np.zeros((topo.joint_count, 3))
    start[topo.root_index] = root
    partials = [start]
    branches = [0] * topo.joint_count
    branches[topo.root_index] = 1
    truncated = False

    for joint in topo.solve_order:
        parent = topo.parent[joint]
        radius = float(lengths[topo.bone_index(joint)])
        grown: list[Pose3D] = []
        for partial in partials:
            hits = ray_sphere_intersections(rays[joint], partial[parent], radius)
            branches[joint] = max(branches[joint], len(hits))
            for t in hits:
                candidate = partial.copy()
                candidate[joint] = rays[joint].point_at(t)
                grown.append(candidate)
        if len(grown) > cap:
            truncated = True
            grown = grown[:cap]
        partials = grown
        if not partials:
            logger.debug("Every branch pruned at joint %d", joint)
            break

    return CandidateSet(poses=partials, branch_count_per_joint=branches, truncated=truncated)


def analyze_sample(
    joints_3d: Pose3D,
    joints_2d: Pose2D,
    intrinsics: CameraIntrinsics,
    topo: SkeletonTopology,
    cap: int,
    tolerance_mm: float = 1e-6,
) -> dict:
    """Run the depth oracle on one sample using its true root depth and bone lengths.

    Returns:
        JSON-ready summary with candidate count, branch counts, membership of
        the true pose, the best candidate's worst joint error and the
        reprojection residual of that candidate.
    """
    joints_3d = np.asarray(joints_3d, dtype=np.float64)
    candidates = chain_candidates(
        obs=joints_2d,
        lengths=bone_lengths(joints_3d, topo),
        intrinsics=intrinsics,
        topo=topo,
        root_depth=float(joints_3d[topo.root_index, 2]),
        cap=cap,
    )
    best, error = candidates.closest(joints_3d)
    residual = math.inf
    if best >= 0:
        reprojected = project(candidates.poses[best], intrinsics)
        residual = float(np.abs(reprojected - np.asarray(joints_2d)).max())
    return {
        "candidate_count": len(candidates),
        "branch_count_per_joint": candidates.branch_count_per_joint,
        "truncated": candidates.truncated,
        "contains_truth": error <= tolerance_mm,
        "best_error_mm": error if math.isfinite(error) else None,
        "best_reprojection_px": residual if math.isfinite(residual) else None,
    }
