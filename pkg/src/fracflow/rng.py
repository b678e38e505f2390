"""Deterministic 64-bit generator for reproducible random fields.

The integer mixing follows the splitmix64 recipe, so a port in any other
language reproduces the same byte-exact field values from the same seed.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Stream of 64-bit words and unit-interval doubles."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        # top 53 bits give a uniform double on [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def next_symmetric(self) -> float:
        return 2.0 * self.next_unit() - 1.0

    def symmetric_array(self, count: int) -> np.ndarray:
        return np.array([self.next_symmetric() for _ in range(count)], dtype=float)
