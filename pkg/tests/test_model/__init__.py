"""Tests for the lifting model."""
