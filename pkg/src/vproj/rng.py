"""Deterministic 64-bit generator for graph construction.

Graph builds must replay identically from a seed, across runs and across
language rebuilds, so the generator is pinned to the SplitMix64 constants
instead of whatever the platform RNG happens to be.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in (0, 1], safe as a log() argument."""
        return ((self.next_uint64() >> 11) + 1) * 2.0**-53
