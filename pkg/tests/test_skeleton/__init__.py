"""Tests for skeleton topology."""
