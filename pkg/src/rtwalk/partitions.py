"""Integer partitions: enumeration, conjugation, hook-length dimensions, class sizes.

A partition of ``n`` plays two roles here: as a cycle type it labels a
conjugacy class of S_n, and as a Young diagram it labels an irreducible
representation.  All integer quantities (dimensions, class sizes) are exact
Python ints.

Partitions of ``n`` are always listed in lexicographically descending order,
so ``(n)`` comes first and ``(1, ..., 1)`` last.  The same order indexes every
dense vector over partitions in the package.
"""
from __future__ import annotations

from collections import Counter
from functools import lru_cache
from math import factorial, lgamma, log

import numpy as np
from numba import njit

ENUMERATION_CAP = 80


class Partition(tuple):
    """A partition stored as its non-increasing tuple of positive parts.

    >>> Partition((3, 1)).conjugate()
    Partition(2, 1, 1)
    >>> str(Partition((5, 4, 4, 2)))
    '5,4,4,2'
    """

    __slots__ = ()

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        for p in parts:
            if p < 1:
                raise ValueError(f"partition parts must be positive, got {parts}")
        for a, b in zip(parts, parts[1:]):
            if b > a:
                raise ValueError(f"partition {parts} is not in non-increasing order")
        return tuple.__new__(cls, parts)

    @classmethod
    def _trusted(cls, parts):
        return tuple.__new__(cls, parts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Inverse of ``str``: ``"3,1"`` -> ``Partition(3, 1)``; ``""`` is empty."""
        text = text.strip()
        if not text:
            return cls(())
        return cls(int(p) for p in text.split(","))

    @property
    def n(self) -> int:
        return sum(self)

    @property
    def parts(self) -> tuple[int, ...]:
        return tuple(self)

    def __repr__(self):
        return f"Partition({', '.join(map(str, self))})"

    def __str__(self):
        return ",".join(map(str, self))

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def truncate(self) -> "Partition":
        return truncate(self)


def _check_n(n: int) -> None:
    if not 1 <= n <= ENUMERATION_CAP:
        raise ValueError(f"n must satisfy 1 <= n <= {ENUMERATION_CAP}, got {n}")


def iter_partitions(n: int):
    """Yield the partitions of ``n`` in lexicographically descending order."""
    _check_n(n)
    a = [n]
    while True:
        yield Partition._trusted(tuple(a))
        rem = 0
        while a and a[-1] == 1:
            a.pop()
            rem += 1
        if not a:
            return
        a[-1] -= 1
        v = a[-1]
        rem += 1
        while rem > v:
            a.append(v)
            rem -= v
        if rem:
            a.append(rem)


@lru_cache(maxsize=16)
def _partition_list(n: int) -> tuple[Partition, ...]:
    return tuple(iter_partitions(n))


def enumerate_partitions(n: int) -> list[Partition]:
    """All partitions of ``n``, each exactly once, largest first part first.

    >>> enumerate_partitions(4)
    [Partition(4), Partition(3, 1), Partition(2, 2), Partition(2, 1, 1), Partition(1, 1, 1, 1)]
    """
    return list(_partition_list(n))


@lru_cache(maxsize=16)
def partition_index(n: int) -> dict[Partition, int]:
    """Map each partition of ``n`` to its position in the canonical order."""
    return {lam: i for i, lam in enumerate(_partition_list(n))}


def conjugate(lam) -> Partition:
    """Transpose of the Young diagram."""
    lam = tuple(lam)
    if not lam:
        return Partition._trusted(())
    return Partition._trusted(
        tuple(sum(1 for p in lam if p > j) for j in range(lam[0]))
    )


def truncate(lam) -> Partition:
    """Drop the first row: ``(l1, l2, ..., lk) -> (l2, ..., lk)``."""
    return Partition._trusted(tuple(lam)[1:])


def hook_lengths(lam) -> list[int]:
    lam = tuple(lam)
    conj = conjugate(lam)
    return [
        lam[i] - j + conj[j] - i - 1
        for i in range(len(lam))
        for j in range(lam[i])
    ]


@lru_cache(maxsize=None)
def _dimension(lam: tuple) -> int:
    prod = 1
    for h in hook_lengths(lam):
        prod *= h
    return factorial(sum(lam)) // prod


def dimension(lam) -> int:
    """Dimension of the irreducible representation ``lam`` (hook-length formula).

    The empty partition has dimension 1.
    """
    return _dimension(tuple(lam))


def centralizer_size(lam) -> int:
    """``z_lam = prod_k k^{m_k} m_k!``, the order of the centralizer of a class."""
    z = 1
    for k, m in Counter(lam).items():
        z *= k**m * factorial(m)
    return z


def class_size(lam) -> int:
    """Number of permutations of ``sum(lam)`` points with cycle type ``lam``."""
    return factorial(sum(lam)) // centralizer_size(lam)


def fixed_point_count(lam) -> int:
    """Number of fixed points of a permutation of cycle type ``lam``."""
    return sum(1 for p in lam if p == 1)


def cycle_type(perm) -> Partition:
    """Cycle type of a permutation given in one-line notation ``perm[i] = image of i``."""
    n = len(perm)
    seen = [False] * n
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        lengths.append(length)
    lengths.sort(reverse=True)
    return Partition._trusted(tuple(lengths))


# --- array form used by the compiled kernels -------------------------------


@njit(cache=True)
def _bounded_counts(n):
    # counts[m, k] = number of partitions of m with every part <= k
    counts = np.zeros((n + 1, n + 1), dtype=np.int64)
    counts[0, :] = 1
    for k in range(1, n + 1):
        for m in range(1, n + 1):
            counts[m, k] = counts[m, k - 1]
            if m >= k:
                counts[m, k] += counts[m - k, k]
    return counts


@njit(cache=True)
def _fill_partitions(n, out, lengths):
    a = np.zeros(n + 1, dtype=np.int64)
    a[0] = n
    k = 1
    idx = 0
    while True:
        for i in range(k):
            out[idx, i] = a[i]
        lengths[idx] = k
        idx += 1
        rem = 0
        while k > 0 and a[k - 1] == 1:
            k -= 1
            rem += 1
        if k == 0:
            break
        a[k - 1] -= 1
        v = a[k - 1]
        rem += 1
        while rem > v:
            a[k] = v
            k += 1
            rem -= v
        if rem > 0:
            a[k] = rem
            k += 1
    return idx


@njit(cache=True)
def rank_parts(parts, length, n, counts):
    """Canonical index of a partition given as descending ``parts[:length]``."""
    r = 0
    m = n
    k = n
    for i in range(length):
        v = parts[i]
        r += counts[m, k] - counts[m, v]
        m -= v
        k = v
    return r


@njit(cache=True)
def cycle_type_rank(perm, counts, seen, lengths_buf):
    """Canonical index of the cycle type of ``perm``; ``seen``/``lengths_buf`` are scratch."""
    n = perm.shape[0]
    for i in range(n):
        seen[i] = False
    k = 0
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        lengths_buf[k] = length
        k += 1
    buf = np.sort(lengths_buf[:k])[::-1]
    return rank_parts(buf, k, n, counts)


@njit(cache=True)
def _log_dimensions(n, parts, lengths):
    count = parts.shape[0]
    out = np.empty(count, dtype=np.float64)
    conj = np.zeros(n + 1, dtype=np.int64)
    lf = lgamma(n + 1.0)
    for idx in range(count):
        k = lengths[idx]
        first = parts[idx, 0]
        for j in range(first):
            c = 0
            for i in range(k):
                if parts[idx, i] > j:
                    c += 1
                else:
                    break
            conj[j] = c
        s = 0.0
        for i in range(k):
            row = parts[idx, i]
            for j in range(row):
                s += log(row - j + conj[j] - i - 1.0)
        out[idx] = lf - s
    return out


@njit(cache=True)
def _contents(parts, lengths):
    # sum over cells of (column - row) = sum_i C(l_i, 2) - sum_j C(l'_j, 2)
    count = parts.shape[0]
    out = np.empty(count, dtype=np.int64)
    for idx in range(count):
        s = 0
        for i in range(lengths[idx]):
            row = parts[idx, i]
            s += row * (row - 1) // 2 - i * row
        out[idx] = s
    return out


@njit(cache=True)
def _log_centralizers(parts, lengths):
    count = parts.shape[0]
    out = np.empty(count, dtype=np.float64)
    for idx in range(count):
        s = 0.0
        i = 0
        k = lengths[idx]
        while i < k:
            v = parts[idx, i]
            m = 0
            while i < k and parts[idx, i] == v:
                m += 1
                i += 1
            s += m * log(float(v)) + lgamma(m + 1.0)
        out[idx] = s
    return out


class PartitionTable:
    """Dense array view of all partitions of ``n`` in canonical order.

    ``parts`` is a ``(p(n), n)`` int16 array padded with zeros and ``lengths``
    holds the number of parts in each row.  ``counts`` is the table used by
    :func:`rank_parts`.
    """

    def __init__(self, n: int):
        _check_n(n)
        self.n = n
        self.counts = _bounded_counts(n)
        size = int(self.counts[n, n])
        self.parts = np.zeros((size, n), dtype=np.int16)
        self.lengths = np.zeros(size, dtype=np.int64)
        filled = _fill_partitions(n, self.parts, self.lengths)
        assert filled == size

    def __len__(self):
        return self.parts.shape[0]

    def first_parts(self) -> np.ndarray:
        return self.parts[:, 0].astype(np.int64)

    def log_dimensions(self) -> np.ndarray:
        return _log_dimensions(self.n, self.parts, self.lengths)

    def log_centralizers(self) -> np.ndarray:
        return _log_centralizers(self.parts, self.lengths)

    def contents(self) -> np.ndarray:
        return _contents(self.parts, self.lengths)

    def partition(self, idx: int) -> Partition:
        return Partition._trusted(tuple(int(v) for v in self.parts[idx, : self.lengths[idx]]))

    def rank(self, lam) -> int:
        arr = np.asarray(tuple(lam), dtype=np.int64)
        return int(rank_parts(arr, len(arr), self.n, self.counts))


@lru_cache(maxsize=8)
def partition_table(n: int) -> PartitionTable:
    return PartitionTable(n)


def partition_count(n: int) -> int:
    """p(n), read from the bounded-count table."""
    if n == 0:
        return 1
    _check_n(n)
    return int(_bounded_counts(n)[n, n])
