"""Reproducible random numbers from a single 64-bit seed.

The generator is SplitMix64 (Steele, Lea & Flood 2014): the i-th output
(i = 0, 1, ...) of stream ``seed`` is

    z  = seed + (i + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9         (mod 2**64)
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB         (mod 2**64)
    z ^= z >> 31

and a uniform double in [0, 1) is ``(z >> 11) * 2**-53``.  Nothing else
in the package draws random numbers, so every generated field can be
reproduced bit-for-bit from its seed in any language.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Return ``count`` raw 64-bit outputs of the stream, starting at ``offset``."""
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform(seed: int, count: int, low: float = 0.0, high: float = 1.0,
            offset: int = 0) -> np.ndarray:
    """Uniform doubles in ``[low, high)`` drawn from :func:`splitmix64`."""
    z = splitmix64(seed, count, offset)
    u = (z >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return low + (high - low) * u


def derive_seed(seed: int, *labels: int) -> int:
    """Deterministically derive a child seed, e.g. one per sample of a suite."""
    s = seed % 2**64
    for lab in labels:
        s = int(splitmix64(s ^ (lab % 2**64), 1)[0])
    return s
