"""Counter-keyed random streams usable from Python and from compiled kernels.

Every replica of every experiment draws from its own xoshiro256** stream whose
256-bit state is derived by SplitMix64 from ``(seed, stream_index)``.  Results
therefore depend only on the seed and the replica index, never on how replicas
are scheduled across threads.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_LOW32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)
_SEED_MASK = (1 << 64) - 1


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def seed_stream(seed, stream, s):
    """Fill the 4-word state ``s`` for stream ``stream`` of ``seed``."""
    x = _mix(np.uint64(seed) + _GOLDEN) ^ np.uint64(stream)
    x = _mix(x)
    for i in range(4):
        x = x + _GOLDEN
        s[i] = _mix(x)


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
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


@njit(cache=True)
def randbelow(s, n):
    """Uniform integer in ``[0, n)`` for ``1 <= n < 2**32`` (Lemire's method)."""
    nn = np.uint64(n)
    m = (next_u64(s) >> np.uint64(32)) * nn
    low = m & _LOW32
    if low < nn:
        threshold = (_TWO32 - nn) % nn
        while low < threshold:
            m = (next_u64(s) >> np.uint64(32)) * nn
            low = m & _LOW32
    return np.int64(m >> np.uint64(32))


@njit(cache=True)
def random01(s):
    """Uniform double in ``[0, 1)`` with 53 random bits."""
    return np.float64(next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def shuffle_inplace(s, arr, start, stop):
    """Fisher-Yates shuffle of ``arr[start:stop]``."""
    for i in range(stop - 1, start, -1):
        j = start + randbelow(s, i - start + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


def normalize_seed(seed: int) -> int:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return int(seed) & _SEED_MASK


class Stream:
    """Python handle on one random stream.

    >>> a, b = Stream(7), Stream(7)
    >>> [a.randbelow(10) for _ in range(5)] == [b.randbelow(10) for _ in range(5)]
    True
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = normalize_seed(seed)
        self.stream = int(stream)
        self.state = np.zeros(4, dtype=np.uint64)
        seed_stream(np.uint64(self.seed), np.uint64(self.stream), self.state)

    def randbelow(self, n: int) -> int:
        if not 1 <= n < 2**32:
            raise ValueError(f"randbelow needs 1 <= n < 2**32, got {n}")
        return int(randbelow(self.state, n))

    def random(self) -> float:
        return float(random01(self.state))

    def shuffle(self, arr: np.ndarray) -> None:
        shuffle_inplace(self.state, arr, 0, len(arr))

    def __repr__(self):
        return f"Stream(seed={self.seed}, stream={self.stream})"
