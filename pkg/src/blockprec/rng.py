"""Seeded random matrix generation.

The generator is xoshiro256++ (Blackman & Vigna), seeded through SplitMix64.
Both algorithms are implemented here so the bit stream is fixed by this
package alone and stable across releases; streams never depend on numpy's
random machinery.  Matrices are filled in row-major order.
"""

import numpy as np

from ._kernels import xoshiro256pp_fill

__all__ = ["Xoshiro256pp", "random_uniform_matrix", "GENERATOR_NAME"]

GENERATOR_NAME = "xoshiro256++ (SplitMix64 seeding)"

_MASK64 = (1 << 64) - 1


def _splitmix64_next(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    w = z
    w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z, w ^ (w >> 31)


class Xoshiro256pp:
    """xoshiro256++ stream of float64 values uniform on [0, 1)."""

    def __init__(self, seed: int):
        z = int(seed) & _MASK64
        state = np.empty(4, dtype=np.uint64)
        for i in range(4):
            z, word = _splitmix64_next(z)
            state[i] = word
        if not state.any():
            state[0] = 0x9E3779B97F4A7C15  # all-zero state is invalid
        self._state = state

    def uniform(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        xoshiro256pp_fill(self._state, out)
        return out

    def uniform_matrix(self, rows: int, cols: int, lo: float, hi: float) -> np.ndarray:
        if not lo < hi:
            raise ValueError(f"empty interval: lo={lo!r} must be < hi={hi!r}")
        u = self.uniform(rows * cols)
        return (lo + (hi - lo) * u).reshape(rows, cols)


def random_uniform_matrix(rows: int, cols: int, lo: float, hi: float,
                          seed: int) -> np.ndarray:
    """Dense (rows, cols) matrix with i.i.d. entries uniform on [lo, hi).

    Deterministic for a fixed seed: one xoshiro256++ stream per call, entries
    drawn in row-major order.
    """
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return Xoshiro256pp(seed).uniform_matrix(rows, cols, lo, hi)
