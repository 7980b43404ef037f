"""Training loop, evaluation protocols and ablations."""
