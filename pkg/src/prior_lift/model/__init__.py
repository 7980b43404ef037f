"""Prior-augmented lifting model."""
