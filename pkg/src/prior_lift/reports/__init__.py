"""Metric and ablation report writers."""
