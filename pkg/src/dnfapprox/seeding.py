"""Deterministic seed derivation for trials.

``mix64`` is the SplitMix64 output finalizer (Steele, Lea & Flood 2014):

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

all arithmetic mod 2**64. A trial seed is
``mix64(master ^ ((trial + 1) * 0x9E3779B97F4A7C15 mod 2**64))``, so with
``master = 0`` the trial seeds are exactly the SplitMix64 stream seeded at 0.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    if not 0 <= master_seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {master_seed}")
    return mix64(master_seed ^ (((trial + 1) * GOLDEN) & MASK64))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & MASK64)
