"""Depth reconstruction and rigid alignment."""
