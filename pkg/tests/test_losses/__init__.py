"""Tests for training losses."""
