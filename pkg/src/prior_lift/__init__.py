"""Prior Lift - 2D to 3D human pose lifting with bone-length and camera priors."""

__version__ = "0.1.0"
