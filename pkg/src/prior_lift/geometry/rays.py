"""Rays in camera space."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from prior_lift.errors import InvalidInputError

UNIT_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Ray:
    """Half-line ``origin + t * direction`` for t > 0.

    Args:
        origin: Start point (mm).
        direction: Unit direction.
    """

    origin: npt.NDArray[np.float64]
    direction: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        direction = np.asarray(self.direction, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(direction) - 1.0) > UNIT_TOLERANCE:
            raise InvalidInputError("Ray direction must have unit length.")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    @classmethod
    def through(cls, origin: npt.ArrayLike, direction: npt.ArrayLike) -> "Ray":
        """Build a ray from an arbitrary nonzero direction, normalizing it."""
        direction = np.asarray(direction, dtype=np.float64)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise InvalidInputError("Ray direction must be nonzero.")
        return cls(origin=np.asarray(origin, dtype=np.float64), direction=direction / norm)

    def point_at(self, t: float) -> npt.NDArray[np.float64]:
        """Point at parameter t."""
        return self.origin + t * self.direction
