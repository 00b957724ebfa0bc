"""Deterministic random sources.

All randomness flows from a single 64-bit seed into numpy's PCG64 bit
generator.  Per-task seeds are ``splitmix64(seed ^ index)`` so parallel or
out-of-order work reproduces exactly what a serial run would produce.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    return splitmix64((seed ^ index) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def uniform_digits(seed: int, base: int, size: int) -> np.ndarray:
    """``size`` i.i.d. uniform digits in ``[0, base)`` as uint8."""
    return make_rng(seed).integers(0, base, size=size, dtype=np.uint8)
