"""Seeded random streams.

All randomness comes from numpy's PCG64 bit generator, whose output for a
given seed is fixed across platforms and numpy versions.
"""

from collections.abc import Sequence

import numpy as np

Rng = np.random.Generator


def make_rng(seed: int | Sequence[int]) -> Rng:
    """Create a PCG64 generator from a seed or a sequence of integers.

    A sequence such as ``(seed, subject, index)`` gives an independent
    stream per item, so items can be produced in any order.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
