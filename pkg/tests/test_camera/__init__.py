"""Tests for camera intrinsics."""
