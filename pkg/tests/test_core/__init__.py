"""Tests for the numeric core."""
