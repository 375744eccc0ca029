"""Portable deterministic randomness.

All randomized operations in the toolkit (stratified splitting, augmentation
sampling, perturbation masks) draw from splitmix64 so that a given seed
reproduces byte-identical results on any platform or language. The generator
is the Steele/Lea/Flood (2014) mixer:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output z XOR (z >> 31)

Bounded integers use rejection sampling (no modulo bias), floats take the top
53 bits, and shuffling is a backwards Fisher-Yates pass. Reimplementing these
five rules in another language reproduces every split and every synthetic
sample this package emits.
"""

from __future__ import annotations

from typing import Iterable, List, MutableSequence, Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *parts: int) -> int:
    """Fold extra indices into a master seed.

    Used to hand independent substreams to per-class shuffles and per-item
    inserter calls so results do not depend on execution order.
    """
    state = mix64(seed & _MASK64)
    for part in parts:
        state = mix64(state ^ mix64((part & _MASK64) + _GOLDEN))
    return state


class SplitMix64:
    """Sequential splitmix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < threshold:
                return x % n

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def choice(self, xs: Sequence[T]) -> T:
        return xs[self.below(len(xs))]

    def shuffle(self, xs: MutableSequence[T]) -> None:
        """In-place backwards Fisher-Yates shuffle."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def shuffled(self, xs: Iterable[T]) -> List[T]:
        out = list(xs)
        self.shuffle(out)
        return out

    def sample_indices(self, n: int, k: int) -> List[int]:
        """k distinct indices drawn uniformly from range(n)."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        self.shuffle(pool)
        return pool[:k]
