"""Tests for geometry."""
