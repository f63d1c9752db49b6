"""Seeded random streams.

Every stochastic component draws from its own generator, derived from the
user seed XORed with a fixed purpose constant. Toggling one consumer (say,
noise injection) therefore never perturbs another stream (say, the shuffle
order). Normal variates are produced by Box-Muller on top of the uniform
stream so the sampling recipe is fully pinned down by this module.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Fixed purpose constants (arbitrary, well-mixed 64-bit words).
INIT = 0x9E3779B97F4A7C15
SHUFFLE = 0xD1B54A32D192ED03
TSAMPLE = 0x8BB84B93962EACC9
NOISE = 0x2545F4914F6CDD1D
SPLIT = 0x94D049BB133111EB
INJECT = 0xBF58476D1CE4E5B9
GMM = 0xFF51AFD7ED558CCD
MC = 0xC4CEB9FE1A85EC53

_GOLDEN = 0x9E3779B97F4A7C15


def derive(seed: int, purpose: int) -> np.random.Generator:
    """Generator for one purpose: seeded with ``seed XOR purpose`` (64-bit)."""
    return np.random.Generator(np.random.PCG64((seed ^ purpose) & _MASK64))


def mix(seed: int, *values: int) -> int:
    """Fold extra integers (dimension index, fold id, ...) into a seed.

    splitmix64-style: multiply by the golden-ratio word, xor-shift, combine.
    """
    h = seed & _MASK64
    for v in values:
        x = (v * _GOLDEN) & _MASK64
        x ^= x >> 31
        h = (h ^ x) & _MASK64
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 29
    return h & _MASK64


def box_muller(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Standard-normal array of ``shape`` via the Box-Muller transform.

    Consumes uniforms in pairs; u1 is reflected off zero so log(u1) is finite.
    """
    n = int(np.prod(shape)) if shape else 1
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(2.0 * np.pi * u2)
    out[1::2] = r * np.sin(2.0 * np.pi * u2)
    return out[:n].reshape(shape)
