"""Deterministic, splittable random streams for the problem generators.

The generator is counter based on the SplitMix64 finalizer: draw i of
stream sid under seed s is

    mix64(key(s, sid) + (i + 1) * GAMMA)   with   key = mix64(mix64(s) ^ mix64(sid + GAMMA))

where GAMMA = 0x9E3779B97F4A7C15 and mix64 is the xor-shift/multiply
finalizer (constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).  Every field
of an instance draws from its own stream, so layouts never depend on call
order, and identical (seed, stream, index) triples give identical 64-bit
words on any platform.  Uniforms take the top 53 bits shifted into (0, 1];
normal variates come from Box-Muller pairs on consecutive uniforms rather
than any platform library, which keeps golden snapshots stable.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64


def _mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):  # wraparound is the point
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


class Stream:
    """One addressable random stream; draws advance an internal counter."""

    def __init__(self, seed: int, stream_id: int):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._key = _mix64(_mix64(_U64(seed % (1 << 64))) ^ _mix64(_U64(stream_id % (1 << 64)) + _GAMMA))
        self._pos = 0

    def _raw(self, count: int) -> np.ndarray:
        idx = np.arange(self._pos + 1, self._pos + count + 1, dtype=np.uint64)
        self._pos += count
        with np.errstate(over="ignore"):
            return _mix64(self._key + idx * _GAMMA)

    def uniform(self, count: int) -> np.ndarray:
        """Uniform draws in (0, 1]."""
        return ((self._raw(count) >> _U64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def uniform_range(self, lo: float, hi: float, count: int) -> np.ndarray:
        return lo + (hi - lo) * self.uniform(count)

    def normal(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller on consecutive uniform pairs."""
        half = (count + 1) // 2
        u = self.uniform(2 * half)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * half)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:count]

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (53-bit resolution is ample here)."""
        if hi < lo:
            raise ValueError("empty integer range")
        u = float(self.uniform(1)[0])
        k = lo + int(u * (hi - lo + 1))
        return min(k, hi)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        perm = np.arange(n)
        u = self.uniform(max(n - 1, 0))
        for i in range(n - 1, 0, -1):
            j = int(u[n - 1 - i] * (i + 1))
            j = min(j, i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
