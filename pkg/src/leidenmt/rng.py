"""xorshift32 pseudo-random generator used by randomized refinement."""

from __future__ import annotations

import numpy as np

__all__ = ["Xorshift32", "derive_states"]

_MASK32 = 0xFFFFFFFF
_GOLDEN = 0x9E3779B9  # odd increment decorrelates per-worker streams


class Xorshift32:
    """32-bit xorshift generator; the update permutes the nonzero states."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 < seed <= _MASK32:
            raise ValueError("seed must be a nonzero 32-bit integer")
        self.state = seed

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & _MASK32
        x ^= x >> 17
        x ^= (x << 5) & _MASK32
        self.state = x
        return x

    def next_float(self) -> float:
        """Uniform draw in (0, 1)."""
        return self.next() / 4294967296.0


def derive_states(seed: int, count: int) -> np.ndarray:
    """Per-worker xorshift states: worker 0 gets the seed itself."""
    states = np.empty(count, dtype=np.int64)
    for t in range(count):
        s = (seed + t * _GOLDEN) & _MASK32
        if s == 0:
            s = _GOLDEN
        states[t] = s
    return states
