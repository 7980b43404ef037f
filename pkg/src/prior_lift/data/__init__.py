"""Datasets, synthetic generation and standardization statistics."""
