"""Seeded pseudo-random generator with a pinned, documented algorithm.

Reproducibility of sampled contexts and mock generations is part of the
run contract, so the generator cannot be left to whatever the platform's
``random`` module happens to do for a given interpreter version. This
module pins the full procedure:

* State: xoshiro256** (Blackman/Vigna), four 64-bit words.
* Seeding: the user seed, reduced mod 2**64, is expanded into the four
  state words with splitmix64.
* Bounded integers: ``below(n)`` draws 64-bit words and rejects values in
  the final partial cycle (draw ``u`` until ``u < 2**64 - (2**64 % n)``,
  return ``u % n``), so results are exactly uniform.
* Sampling without replacement: a partial Fisher-Yates shuffle over the
  index array ``0..n-1``, taking the first ``k`` entries.

All arithmetic is integer mod 2**64, so streams are identical on every
platform and interpreter.
"""

from __future__ import annotations

ALGORITHM = "xoshiro256** (splitmix64 seeding)"

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """xoshiro256** stream seeded from a single integer via splitmix64."""

    def __init__(self, seed: int) -> None:
        sm = seed & _MASK64
        words = []
        for _ in range(4):
            sm, w = _splitmix64(sm)
            words.append(w)
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq):
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.below(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """First k entries of a partial Fisher-Yates shuffle of range(n)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]
