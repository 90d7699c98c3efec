"""Reproducible random streams.

Every stream is a xoshiro256** generator (Blackman & Vigna, 2018) whose
256-bit state is filled from a 64-bit seed by four successive SplitMix64
outputs. Per-run seeds come from ``derive_seed(master, i)``, the ``i``-th
SplitMix64 output of a generator seeded with ``master``:

    z = master + (i + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    seed_i = z ^ (z >> 31)

so a batch can be extended without changing the streams of earlier runs.

Doubles are the top 53 bits of an output scaled by 2**-53, giving values in
[0, 1). Bounded integers use rejection on ``2**64 mod bound`` so they are
exactly uniform. All arithmetic is on unsigned 64-bit words and the streams
are identical on every platform.

The kernels operate on a ``uint64[4]`` state array in place so the
simulation loop can call them from compiled code; :class:`Stream` is the
Python-facing handle around that array.
"""

from __future__ import annotations

import numba
import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_GAMMA = np.uint64(GOLDEN_GAMMA)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@numba.njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(nogil=True, cache=True)
def seed_state(seed, state):
    z = np.uint64(seed)
    for i in range(4):
        z = z + _GAMMA
        state[i] = _mix64(z)


@numba.njit(nogil=True, cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(nogil=True, cache=True)
def next_double(s):
    return np.float64(next_u64(s) >> np.uint64(11)) * _TO_UNIT


@numba.njit(nogil=True, cache=True)
def next_below(s, bound):
    b = np.uint64(bound)
    threshold = (np.uint64(0) - b) % b
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % b)


@numba.njit(nogil=True, cache=True)
def _fill_doubles(s, out):
    for i in range(out.size):
        out[i] = next_double(s)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed of the ``index``-th stream under ``master_seed`` (SplitMix64)."""
    z = (master_seed + (index + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class Stream:
    """A seeded xoshiro256** stream.

    The ``state`` array is shared with compiled kernels, which advance it in
    place; two streams built from the same seed produce identical draws.
    """

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self.state = np.empty(4, dtype=np.uint64)
        seed_state(np.uint64(seed), self.state)

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self, size: int | None = None):
        """Uniform double(s) in [0, 1)."""
        if size is None:
            return float(next_double(self.state))
        out = np.empty(size, dtype=np.float64)
        _fill_doubles(self.state, out)
        return out

    def integers(self, bound: int) -> int:
        """Uniform integer in ``range(bound)``."""
        if bound < 1:
            raise ValueError("bound must be positive")
        return int(next_below(self.state, bound))

    def __repr__(self):
        return f"Stream(seed={self.seed})"
