"""Counter-based pseudo-random streams shared by all trainer backends.

The generator is SplitMix64 used in counter mode: draw number n of a stream
with key K is mix64(K + (n+1)*GAMMA) mapped to a 53-bit uniform in [0, 1).
Because each draw is a pure function of (key, n), any consumer can jump to an
arbitrary position without sequencing state, vectorize draw ranges, and
reproduce the exact same stream in C and in numpy uint64 arithmetic.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Salts for domain separation of streams derived from one user seed.
STREAM_INIT = 0x243F6A8885A308D3
STREAM_TRAIN = 0x13198A2E03707344


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, salt: int) -> int:
    """Derive the 64-bit key of one named stream from a user seed."""
    return mix64((seed & MASK64) ^ (salt & MASK64))


def uniform(key: int, n: int) -> float:
    """Draw number n (0-based) of stream `key`, uniform in [0, 1)."""
    z = mix64((key + ((n + 1) * GAMMA)) & MASK64)
    return (z >> 11) * 2.0 ** -53


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """Draws start .. start+count-1 of stream `key` as a float64 array."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class CounterRng:
    """Sequential cursor over one counter stream.

    Thin convenience for Python-side consumers (init, proposals in the
    fallback kernel); the compiled kernel computes the same draws inline.
    """

    def __init__(self, key: int, cursor: int = 0):
        self.key = key & MASK64
        self.cursor = cursor

    def next_float(self) -> float:
        u = uniform(self.key, self.cursor)
        self.cursor += 1
        return u

    def next_index(self, n: int) -> int:
        """Uniform integer in [0, n), by truncation of u*n."""
        return int(self.next_float() * n)

    def next_symmetric(self) -> float:
        """Uniform in [-1, 1)."""
        return 2.0 * self.next_float() - 1.0
