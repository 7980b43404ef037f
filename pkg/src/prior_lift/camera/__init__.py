"""Pinhole camera model and intrinsics normalization."""
