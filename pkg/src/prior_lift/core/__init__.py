"""Dense network machinery: layers, gradients, optimizer."""
