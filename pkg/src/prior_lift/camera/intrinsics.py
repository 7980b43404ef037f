"""Pinhole camera intrinsics, projection and feature normalization."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from prior_lift.errors import BehindCameraError, InvalidInputError
from prior_lift.geometry.rays import Ray
from prior_lift.skeleton.topology import Pose2D, Pose3D


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters plus image resolution, all in pixels.

    Args:
        fx: Horizontal focal length.
        fy: Vertical focal length.
        cx: Principal point x.
        cy: Principal point y.
        res_w: Image width.
        res_h: Image height.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    res_w: int
    res_h: int

    def __post_init__(self) -> None:
        if self.res_w <= 0 or self.res_h <= 0:
            raise InvalidInputError(
                f"Resolution must be positive, got {self.res_w}x{self.res_h}."
            )
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidInputError(f"Focal lengths must be positive, got ({self.fx}, {self.fy}).")
        if not (0 <= self.cx <= self.res_w and 0 <= self.cy <= self.res_h):
            raise InvalidInputError(
                f"Principal point ({self.cx}, {self.cy}) lies outside "
                f"the {self.res_w}x{self.res_h} image."
            )

    @property
    def matrix(self) -> npt.NDArray[np.float64]:
        """The 3x3 calibration matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def to_dict(self) -> dict:
        """Serialize as {fx, fy, cx, cy, res_w, res_h}."""
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "res_w": self.res_w,
            "res_h": self.res_h,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CameraIntrinsics":
        """Build intrinsics from their JSON form."""
        return cls(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            res_w=int(data["res_w"]),
            res_h=int(data["res_h"]),
        )


@dataclass(frozen=True)
class CameraFeatures:
    """Dimensionless camera features appended to the network input.

    Args:
        cx_n: Normalized principal point x, in [-1, 1].
        cy_n: Normalized principal point y, in [-h/w, h/w].
        fx_n: Normalized horizontal focal length.
        fy_n: Normalized vertical focal length.
    """

    cx_n: float
    cy_n: float
    fx_n: float
    fy_n: float

    def as_array(self, width: int = 4) -> npt.NDArray[np.float64]:
        """Feature vector of width 4 ``[cx_n, cy_n, fx_n, fy_n]`` or 3 ``[cx_n, cy_n, f_n]``."""
        if width == 4:
            return np.array([self.cx_n, self.cy_n, self.fx_n, self.fy_n])
        if width == 3:
            return np.array([self.cx_n, self.cy_n, 0.5 * (self.fx_n + self.fy_n)])
        raise InvalidInputError(f"Camera feature width must be 3 or 4, got {width}.")


def _width(intrinsics: CameraIntrinsics) -> float:
    if intrinsics.res_w <= 0:
        raise InvalidInputError("Image width must be positive.")
    return float(intrinsics.res_w)


def normalize_focus(intrinsics: CameraIntrinsics) -> tuple[float, float]:
    """Map the principal point from [0, w] to [-1, 1], preserving aspect ratio.

    Both axes are divided by the width: ``cx_n = 2 cx / w - 1`` and
    ``cy_n = 2 cy / w - h / w``.
    """
    w = _width(intrinsics)
    cx_n = 2.0 * intrinsics.cx / w - 1.0
    cy_n = 2.0 * intrinsics.cy / w - intrinsics.res_h / w
    return cx_n, cy_n


def normalize_focal(intrinsics: CameraIntrinsics) -> tuple[float, float]:
    """Divide each focal length by the image width and multiply by two."""
    w = _width(intrinsics)
    return 2.0 * intrinsics.fx / w, 2.0 * intrinsics.fy / w


def camera_features(intrinsics: CameraIntrinsics) -> CameraFeatures:
    """Combine normalized focus and focal length into one feature record."""
    cx_n, cy_n = normalize_focus(intrinsics)
    fx_n, fy_n = normalize_focal(intrinsics)
    return CameraFeatures(cx_n=cx_n, cy_n=cy_n, fx_n=fx_n, fy_n=fy_n)


def project(pose: Pose3D, intrinsics: CameraIntrinsics) -> Pose2D:
    """Perspective projection of camera-frame joints to pixels.

    Args:
        pose: Joints (..., J, 3) in millimeters.
        intrinsics: Camera intrinsics.

    Returns:
        Pixel coordinates (..., J, 2).

    Raises:
        BehindCameraError: If any joint has z <= 0.
    """
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape[-1] != 3:
        raise InvalidInputError(f"Expected 3D points, got shape {pose.shape}.")
    z = pose[..., 2]
    bad = np.argwhere(~(z > 0))
    if bad.size:
        index = tuple(bad[0])
        raise BehindCameraError(joint=int(index[-1]), depth=float(z[index]))
    u = intrinsics.fx * pose[..., 0] / z + intrinsics.cx
    v = intrinsics.fy * pose[..., 1] / z + intrinsics.cy
    return np.stack([u, v], axis=-1)


def pixel_ray(pixel: npt.ArrayLike, intrinsics: CameraIntrinsics) -> Ray:
    """Ray from the camera center through a pixel.

    The direction is proportional to ``((u - cx) / fx, (v - cy) / fy, 1)``.
    """
    u, v = np.asarray(pixel, dtype=np.float64).reshape(2)
    direction = np.array(
        [(u - intrinsics.cx) / intrinsics.fx, (v - intrinsics.cy) / intrinsics.fy, 1.0]
    )
    return Ray.through(np.zeros(3), direction)
