"""Deterministic random number generation.

Every sampling operation in this package draws from a SplitMix64 stream
(Steele, Lea & Flood 2014), a published 64-bit generator whose output is a
pure function of its 64-bit seed.  Results therefore reproduce bit-for-bit
across platforms, Python versions, and thread counts.

Stream derivation: each operation derives a child stream from the user's
master seed and a fixed ASCII label (e.g. ``derive(seed, "rows")``).  The
child seed is ``mix64(seed XOR fnv1a64(label))``, so streams for different
operations never collide or overlap by construction.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective mixing function."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(label: str) -> int:
    h = 0xCBF29CE484222325
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


class Stream:
    """A SplitMix64 stream with convenience draws used across the package."""

    __slots__ = ("_seed", "_state")

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._state = seed & _MASK64

    def derive(self, label: str) -> "Stream":
        """Child stream keyed by a fixed label; independent of draw position."""
        return Stream(_mix64(self._seed ^ _fnv1a64(label)))

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        return _mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randbelow requires n >= 1, got {n}")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.randbelow(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, items) -> list:
        out = list(items)
        self.shuffle(out)
        return out

    def choice(self, items):
        seq = list(items)
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randbelow(len(seq))]


def stream(seed: int, label: str) -> Stream:
    """The stream used by an operation: master seed + fixed operation label."""
    return Stream(seed).derive(label)
