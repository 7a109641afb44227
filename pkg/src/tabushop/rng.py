"""Portable deterministic RNG used by all search runs.

SplitMix64 (Steele, Lea & Flood's mix function) is small enough to implement
identically in pure Python and inside the numba kernel, which is what makes
search trajectories bit-reproducible across both execution paths and across
platforms.  Analysis-side randomness (bootstrap resampling) uses numpy's
PCG64 instead; only the search loops need this generator.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; returns (new_state, output)."""
    state = (state + GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    z = z ^ (z >> 31)
    return state, z


class SplitMix64:
    """Stateful wrapper around :func:`splitmix64_next`.

    Draws below a bound use plain modulo reduction.  The modulo bias is
    negligible for the tiny bounds used here (tenure ranges, tie counts)
    and keeping the reduction trivial means the compiled kernel can
    reproduce the exact same stream.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, z = splitmix64_next(self.state)
        return z

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.below(hi - lo + 1)
