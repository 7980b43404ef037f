"""Tests for training and evaluation."""
