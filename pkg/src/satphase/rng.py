"""Deterministic counter-based random streams.

Every random draw in the package comes from a SplitMix64-style stream
(the finalizer from Steele, Lea & Flood's SplitMix generator).  Streams
are keyed, not stateful across constraints: constraint ``j`` of an
instance reads from the stream keyed by ``(seed, j)``, so generating a
longer instance with the same seed reproduces the shorter one as a
prefix, and any single constraint can be re-derived in isolation.

The scheme is frozen; golden values are pinned in the test suite.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective avalanche mix on 64-bit ints."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, index: int) -> int:
    """Key of the substream for item ``index`` under ``seed``."""
    return mix64((seed & _MASK) ^ mix64(index & _MASK))


def mix_parts(*parts: int) -> int:
    """Fold several integers into one 64-bit seed (order-sensitive)."""
    acc = 0
    for p in parts:
        acc = mix64(acc ^ mix64(p & _MASK))
    return acc


class Stream:
    """Counter-based stream of 64-bit values under a fixed key."""

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, index: int = 0):
        self.key = stream_key(seed, index)
        self.counter = 0

    def next64(self) -> int:
        self.counter += 1
        return mix64((self.key + self.counter * _GOLDEN) & _MASK)

    def below(self, m: int) -> int:
        """Uniform integer in [0, m) by rejection on the biased tail."""
        if m <= 0:
            raise ValueError("m must be positive")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            u = self.next64()
            if u < limit:
                return u % m

    def coin(self) -> int:
        return self.next64() >> 63

    def distinct_tuple(self, n: int, k: int) -> tuple[int, ...]:
        """Uniform ordered k-tuple of distinct values from 1..n."""
        picked: list[int] = []
        while len(picked) < k:
            v = self.below(n) + 1
            if v not in picked:
                picked.append(v)
        return tuple(picked)
