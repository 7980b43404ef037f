"""Skeleton topology and bone features."""
