"""Deterministic, platform-independent random number generation.

The generator is xoshiro256** seeded through splitmix64 (the seeding
recipe recommended by the xoshiro authors). Both algorithms are fixed
64-bit integer recurrences, so a seed means the same stream on every
platform and the whole lab is bit-reproducible.

Two consumption modes, both deterministic:

* scalar draws (``next_u64``, ``random``, ``randint``, ``shuffle``)
  advance the generator's own stream one step per output;
* array draws (``random_array``, ``uniform_array``, ``bernoulli_mask``)
  consume exactly one scalar output ``base`` and expand it into one
  xoshiro256** lane per element: lane ``i`` is seeded by splitmix64
  started at state ``mix64(base) + i * GOLDEN`` and emits one output.
  This is the usual split-into-children construction applied per
  element, and it vectorizes over numpy uint64 arrays.

Gaussian draws are deliberately absent: everything downstream uses
uniform initialization, which avoids transcendental-function drift
between libm implementations.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_U64_GOLDEN = np.uint64(GOLDEN)
_INV_2_53 = float(2.0**-53)


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; return (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _mix64(x: int) -> int:
    """The splitmix64 output function alone (finalizer), for lane seeding."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def _mix64_array(states: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over a uint64 array of states."""
    z = (states + _U64_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _xoshiro_lane_outputs(seeds: np.ndarray) -> np.ndarray:
    """One xoshiro256** output per lane, each lane splitmix64-seeded.

    ``seeds`` is a uint64 array of per-lane splitmix64 starting states;
    the four state words of each lane are the first four splitmix64
    outputs, exactly as in the scalar seeding path.
    """
    s0 = _mix64_array(seeds)
    s1 = _mix64_array(seeds + _U64_GOLDEN)
    s2 = _mix64_array(seeds + np.uint64((2 * GOLDEN) & MASK64))
    s3 = _mix64_array(seeds + np.uint64((3 * GOLDEN) & MASK64))

    x = s1 * np.uint64(5)
    out = ((x << np.uint64(7)) | (x >> np.uint64(57))) * np.uint64(9)
    # The state permutation is irrelevant here (one output per lane),
    # but keep s0..s3 alive for clarity of intent.
    del s0, s2, s3
    return out


class Rng:
    """xoshiro256** stream with documented per-element array splitting."""

    __slots__ = ("seed", "_s")

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        state = self.seed
        s = []
        for _ in range(4):
            state, word = _splitmix64(state)
            s.append(word)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        limit = MASK64 + 1 - ((MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def child(self) -> "Rng":
        """Independent child generator (splitmix64-reseeded from one draw)."""
        return Rng(self.next_u64())

    # -- array draws ----------------------------------------------------

    def _lane_u64(self, count: int) -> np.ndarray:
        base = _mix64(self.next_u64())
        lanes = np.uint64(base) + np.arange(count, dtype=np.uint64) * _U64_GOLDEN
        return _xoshiro_lane_outputs(lanes)

    def random_array(self, shape) -> np.ndarray:
        """Uniform doubles in [0, 1), one independent lane per element."""
        shape = tuple(int(d) for d in (shape if np.iterable(shape) else (shape,)))
        count = int(np.prod(shape)) if shape else 1
        bits = self._lane_u64(count) >> np.uint64(11)
        return (bits.astype(np.float64) * _INV_2_53).reshape(shape)

    def uniform_array(self, shape, low: float, high: float) -> np.ndarray:
        return low + (high - low) * self.random_array(shape)

    def bernoulli_mask(self, shape, keep_prob: float) -> np.ndarray:
        """Float mask of 0/1 with P(1) = keep_prob."""
        return (self.random_array(shape) < keep_prob).astype(np.float64)
