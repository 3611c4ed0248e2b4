"""Seedable random stream shared by the compiled and pure-Python kernels.

The generator is xoshiro256** (Blackman and Vigna) with its 256-bit state
filled from four consecutive outputs of splitmix64 applied to the 64-bit seed.
Bounded integers use rejection sampling so that every index is exactly
equiprobable:

    limit = 2**64 - (2**64 mod k);  draw x until x < limit;  return x mod k

Independent streams for trials, CFTP blocks and worker jobs come from
:func:`derive_seed`, ``seed XOR splitmix64_mix(index + 1)``, where
``splitmix64_mix`` is the splitmix64 output function applied to one state
increment.  Both kernels implement exactly this algorithm; the test vectors in
``tests/test_rng.py`` freeze it.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, count: int) -> list[int]:
    """The first ``count`` outputs of splitmix64 started at ``seed``."""
    x = seed & MASK64
    out = []
    for _ in range(count):
        x = (x + GOLDEN) & MASK64
        out.append(_mix(x))
    return out


def splitmix64_mix(x: int) -> int:
    """One splitmix64 step from state ``x``: a bijective 64-bit hash."""
    return _mix((x + GOLDEN) & MASK64)


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th independent sub-stream of ``seed``."""
    if index < 0:
        raise ValueError("index must be non-negative")
    return (seed ^ splitmix64_mix(index + 1)) & MASK64


def seed_state(seed: int) -> tuple[int, int, int, int]:
    s = tuple(splitmix64(seed, 4))
    if not any(s):  # unreachable for splitmix64, kept as a guard
        raise ValueError("all-zero xoshiro state")
    return s  # type: ignore[return-value]


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """Pure-Python xoshiro256**; slow, but bit-identical to the compiled one."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int = 0, *, state: tuple[int, int, int, int] | None = None):
        self.s0, self.s1, self.s2, self.s3 = state if state is not None else seed_state(seed)

    @property
    def state(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def bounded(self, k: int) -> int:
        """Uniform integer in ``[0, k)`` by rejection."""
        if k <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % k)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % k

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
