"""Exact laws of the walk.

Three independent routes are provided:

* brute-force convolution over the whole group (``n <= 6``);
* a Markov kernel on cycle types, iterated for moderate ``n``;
* a dynamic programme over (permutation, touched set) pairs giving the law of
  the walk stopped when every card has been touched (``n <= 6``).

One step draws an ordered pair ``(i, j)`` uniformly from ``n^2`` pairs and
right-multiplies by the transposition ``(i j)`` (the identity when ``i == j``),
so every transition weight is an integer multiple of ``1/n^2``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

import numpy as np
from numba import njit
from scipy import sparse

from .classdist import ClassDistribution, _fmt
from .errors import InvariantError, TooLargeError
from .partitions import (
    Partition,
    cycle_type,
    enumerate_partitions,
    partition_index,
    partition_table,
    rank_parts,
)

GROUP_MAX_N = 6
CONVOLUTION_MAX_T = 64


# --- whole-group brute force ------------------------------------------------


@lru_cache(maxsize=None)
def _group(n: int):
    perms = list(permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    # swap[k, i, j] = index of perms[k] * (i j), i.e. entries i and j exchanged
    swap = np.empty((len(perms), n, n), dtype=np.int64)
    for k, p in enumerate(perms):
        for i in range(n):
            for j in range(n):
                q = list(p)
                q[i], q[j] = q[j], q[i]
                swap[k, i, j] = index[tuple(q)]
    return perms, index, swap


def _check_group_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > GROUP_MAX_N:
        raise TooLargeError(f"whole-group methods support n <= {GROUP_MAX_N}, got {n}")


@dataclass
class GroupDistribution:
    """Exact law on S_n (``n <= 6``), dense over permutations in lexicographic order."""

    n: int
    probs: list

    @property
    def perms(self) -> list[tuple[int, ...]]:
        return _group(self.n)[0]

    def __getitem__(self, perm):
        return self.probs[_group(self.n)[1][tuple(perm)]]

    def total(self):
        return sum(self.probs, Fraction(0)) if isinstance(self.probs[0], Fraction) else math.fsum(self.probs)

    def class_marginal(self) -> ClassDistribution:
        exact = isinstance(self.probs[0], Fraction)
        index = partition_index(self.n)
        out = [Fraction(0)] * len(index) if exact else np.zeros(len(index))
        for perm, p in zip(self.perms, self.probs):
            out[index[cycle_type(perm)]] += p
        return ClassDistribution(self.n, out)


def _convolution_counts(n: int, t: int):
    # integer weights: the law of X_t is counts / n^(2t)
    perms, _, swap = _group(n)
    counts = np.zeros(len(perms), dtype=object)
    counts[0] = 1
    yield counts
    for _ in range(t):
        new = np.zeros(len(perms), dtype=object)
        # (i j) is an involution, so gathering through swap equals scattering
        for i in range(n):
            for j in range(n):
                new += counts[swap[:, i, j]]
        counts = new
        yield counts


def full_group_convolution(n: int, t: int) -> GroupDistribution:
    """Exact law of ``X_t`` over all ``n!`` permutations.

    >>> full_group_convolution(2, 1).probs
    [Fraction(1, 2), Fraction(1, 2)]
    """
    _check_group_n(n)
    if not 0 <= t <= CONVOLUTION_MAX_T:
        raise ValueError(f"t must lie in [0, {CONVOLUTION_MAX_T}], got {t}")
    for counts in _convolution_counts(n, t):
        pass
    denom = n ** (2 * t)
    return GroupDistribution(n, [Fraction(int(c), denom) for c in counts])


def convolution_series(n: int, t_max: int) -> list[GroupDistribution]:
    """Laws of ``X_0, ..., X_{t_max}`` from a single pass."""
    _check_group_n(n)
    if not 0 <= t_max <= CONVOLUTION_MAX_T:
        raise ValueError(f"t must lie in [0, {CONVOLUTION_MAX_T}], got {t_max}")
    out = []
    for step, counts in enumerate(_convolution_counts(n, t_max)):
        denom = n ** (2 * step)
        out.append(GroupDistribution(n, [Fraction(int(c), denom) for c in counts]))
    return out


# --- cycle-type kernel ------------------------------------------------------


@njit(cache=True)
def _emit(mult, n, counts, dst, num, pos, weight):
    r = 0
    m = n
    k = n
    for v in range(n, 0, -1):
        for _ in range(mult[v]):
            r += counts[m, k] - counts[m, v]
            m -= v
            k = v
    dst[pos] = r
    num[pos] = weight
    return pos + 1


@njit(cache=True)
def _kernel_row(parts, length, n, counts, mult, distinct, dst, num):
    for v in range(n + 1):
        mult[v] = 0
    for i in range(length):
        mult[parts[i]] += 1
    nd = 0
    for i in range(length):
        if i == 0 or parts[i] != parts[i - 1]:
            distinct[nd] = parts[i]
            nd += 1
    pos = 0
    # identity: the n pairs (i, i)
    pos = _emit(mult, n, counts, dst, num, pos, n)
    # merge a cycle of length a with one of length b: 2ab ordered pairs per pair of cycles
    for x in range(nd):
        a = distinct[x]
        for y in range(x, nd):
            b = distinct[y]
            if a == b:
                pairs = mult[a] * (mult[a] - 1) // 2
            else:
                pairs = mult[a] * mult[b]
            if pairs == 0:
                continue
            mult[a] -= 1
            mult[b] -= 1
            mult[a + b] += 1
            pos = _emit(mult, n, counts, dst, num, pos, pairs * 2 * a * b)
            mult[a + b] -= 1
            mult[a] += 1
            mult[b] += 1
    # split a cycle of length c into d and c - d: c ordered pairs per (cycle, distance)
    for x in range(nd):
        c = distinct[x]
        for d in range(1, c // 2 + 1):
            e = c - d
            w = mult[c] * (c if d == e else 2 * c)
            mult[c] -= 1
            mult[d] += 1
            mult[e] += 1
            pos = _emit(mult, n, counts, dst, num, pos, w)
            mult[d] -= 1
            mult[e] -= 1
            mult[c] += 1
    return pos


@njit(cache=True)
def _kernel_csr(n, parts, lengths, counts):
    size = parts.shape[0]
    cap = 1 + n * n
    mult = np.zeros(n + 1, dtype=np.int64)
    distinct = np.zeros(n + 1, dtype=np.int64)
    row_dst = np.empty(cap, dtype=np.int64)
    row_num = np.empty(cap, dtype=np.int64)
    indptr = np.zeros(size + 1, dtype=np.int64)
    for idx in range(size):
        indptr[idx + 1] = indptr[idx] + _kernel_row(
            parts[idx], lengths[idx], n, counts, mult, distinct, row_dst, row_num
        )
    dst = np.empty(indptr[size], dtype=np.int32)
    num = np.empty(indptr[size], dtype=np.int64)
    for idx in range(size):
        k = _kernel_row(parts[idx], lengths[idx], n, counts, mult, distinct, row_dst, row_num)
        start = indptr[idx]
        for q in range(k):
            dst[start + q] = row_dst[q]
            num[start + q] = row_num[q]
    return indptr, dst, num


@dataclass
class CycleTypeKernel:
    """One step of the walk as integer weights over ``n^2`` on cycle types (CSR by source)."""

    n: int
    indptr: np.ndarray
    dst: np.ndarray
    num: np.ndarray

    @property
    def denominator(self) -> int:
        return self.n * self.n

    def row(self, idx: int):
        lo, hi = self.indptr[idx], self.indptr[idx + 1]
        return self.dst[lo:hi], self.num[lo:hi]

    @property
    def transpose_float(self) -> sparse.csr_matrix:
        if not hasattr(self, "_t_float"):
            size = len(self.indptr) - 1
            mat = sparse.csr_matrix(
                (self.num / float(self.denominator), self.dst, self.indptr), shape=(size, size)
            )
            self._t_float = mat.T.tocsr()
        return self._t_float


_kernel_checked = False


def _build_kernel(n: int) -> CycleTypeKernel:
    table = partition_table(n)
    indptr, dst, num = _kernel_csr(n, table.parts.astype(np.int64), table.lengths, table.counts)
    return CycleTypeKernel(n, indptr, dst, num)


def kernel_self_test(n_max: int = GROUP_MAX_N) -> None:
    """Compare kernel rows with one brute-force step from a representative of every class."""
    for n in range(1, n_max + 1):
        kern = _build_kernel(n)
        perms, index, swap = _group(n)
        pindex = partition_index(n)
        for lam in enumerate_partitions(n):
            rep = _representative(lam)
            start = index[rep]
            brute = {}
            for i in range(n):
                for j in range(n):
                    mu = cycle_type(perms[swap[start, i, j]])
                    brute[pindex[mu]] = brute.get(pindex[mu], 0) + 1
            dst, num = kern.row(pindex[lam])
            got = {}
            for d, w in zip(dst.tolist(), num.tolist()):
                got[d] = got.get(d, 0) + w
            if got != brute:
                raise InvariantError(f"cycle-type kernel disagrees with brute force at n={n}, type {lam}")


def _representative(lam) -> tuple[int, ...]:
    perm = []
    start = 0
    for length in lam:
        block = list(range(start, start + length))
        perm.extend(block[1:] + block[:1])
        start += length
    return tuple(perm)


@lru_cache(maxsize=8)
def get_kernel(n: int) -> CycleTypeKernel:
    """Kernel for ``n``; the first call validates the construction against brute force."""
    global _kernel_checked
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not _kernel_checked:
        kernel_self_test()
        _kernel_checked = True
    return _build_kernel(n)


def cycle_type_kernel(lam) -> dict[Partition, Fraction]:
    """Law of the cycle type after one step from any permutation of type ``lam``.

    >>> cycle_type_kernel((1, 1, 1))
    {Partition(2, 1): Fraction(2, 3), Partition(1, 1, 1): Fraction(1, 3)}
    """
    lam = Partition(lam)
    n = lam.n
    kern = get_kernel(n)
    parts = enumerate_partitions(n)
    dst, num = kern.row(partition_index(n)[lam])
    out: dict[Partition, Fraction] = {}
    for d, w in sorted(zip(dst.tolist(), num.tolist())):
        out[parts[d]] = out.get(parts[d], Fraction(0)) + Fraction(w, kern.denominator)
    return out


def _evolve_exact(dist: ClassDistribution, steps: int, kern: CycleTypeKernel):
    denom = 1
    for p in dist.probs:
        denom = denom * p.denominator // math.gcd(denom, p.denominator)
    vec = [int(p * denom) for p in dist.probs]
    size = len(vec)
    src_of = [[] for _ in range(size)]
    for s in range(size):
        dst, num = kern.row(s)
        for d, w in zip(dst.tolist(), num.tolist()):
            src_of[d].append((s, w))
    out = [dist]
    for _ in range(steps):
        vec = [sum(w * vec[s] for s, w in src_of[d]) for d in range(size)]
        denom *= kern.denominator
        out.append(ClassDistribution(dist.n, [Fraction(v, denom) for v in vec]))
    return out


def evolve_class_series(dist: ClassDistribution, steps: int) -> list[ClassDistribution]:
    """Laws after ``0, 1, ..., steps`` further steps of the walk."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    kern = get_kernel(dist.n)
    if dist.exact:
        return _evolve_exact(dist, steps, kern)
    mat = kern.transpose_float
    vec = np.asarray(dist.probs, dtype=np.float64)
    out = [dist]
    for _ in range(steps):
        vec = mat @ vec
        out.append(ClassDistribution(dist.n, vec))
    return out


def evolve_class(dist: ClassDistribution, steps: int) -> ClassDistribution:
    """Law after ``steps`` further steps, exact if ``dist`` is exact."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if dist.exact:
        return evolve_class_series(dist, steps)[-1]
    mat = get_kernel(dist.n).transpose_float
    vec = np.asarray(dist.probs, dtype=np.float64)
    for _ in range(steps):
        vec = mat @ vec
    return ClassDistribution(dist.n, vec)


def walk_class_law(n: int, t: int, exact: bool | None = None) -> ClassDistribution:
    """Cycle-type law of ``X_t`` started from the identity."""
    return evolve_class(ClassDistribution.point_mass(n, exact=exact), t)


def exact_tv(a: ClassDistribution, b: ClassDistribution):
    """Total variation distance between two class-function laws on S_n.

    Both laws are constant on classes, so the distance over permutations
    equals the distance between the class masses.
    """
    if a.n != b.n:
        raise ValueError(f"distributions live on different n: {a.n} vs {b.n}")
    if a.exact and b.exact:
        return sum((abs(x - y) for x, y in zip(a.probs, b.probs)), Fraction(0)) / 2
    x = np.asarray(a.as_float().probs, dtype=np.float64)
    y = np.asarray(b.as_float().probs, dtype=np.float64)
    return 0.5 * math.fsum(np.abs(x - y))


def write_class_series(fh, series) -> None:
    """CSV with columns ``step, partition, probability``."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["step", "partition", "probability"])
    for step, dist in enumerate(series):
        for lam, p in dist.items():
            writer.writerow([step, str(lam), _fmt(p)])


# --- stopped law at the all-touched time -------------------------------------


@dataclass
class StoppedState:
    """A live state of the stopping-time recursion."""

    perm_index: int
    touched: int
    probability: object


@dataclass
class StoppedDistribution:
    """Law of the walk at the first time every card has been touched.

    ``law`` holds the absorbed mass; it falls short of one by ``residual``,
    the mass still live after ``steps`` steps, so the true law is within
    ``residual`` of ``law`` in total variation.  ``tail_bound`` is the union
    bound ``n ((n-1)/n)^(2 steps)`` on that residual.
    """

    law: GroupDistribution
    residual: object
    steps: int
    tail_bound: float
    live: list


@njit(cache=True)
def _stopped_float(n, swap, eps, max_steps):
    nperm = swap.shape[0]
    full = (1 << n) - 1
    live = np.zeros((nperm, full + 1))
    live[0, 0] = 1.0
    absorbed = np.zeros(nperm)
    w = 1.0 / (n * n)
    remaining = 1.0
    steps = 0
    while remaining > eps and steps < max_steps:
        new = np.zeros((nperm, full + 1))
        for p in range(nperm):
            for mask in range(full):
                mass = live[p, mask]
                if mass == 0.0:
                    continue
                mass *= w
                for i in range(n):
                    for j in range(n):
                        q = swap[p, i, j]
                        m2 = mask | (1 << i) | (1 << j)
                        if m2 == full:
                            absorbed[q] += mass
                        else:
                            new[q, m2] += mass
        live = new
        remaining = live.sum()
        steps += 1
    return absorbed, live, remaining, steps


def _stopped_exact(n, swap, eps, max_steps):
    full = (1 << n) - 1
    pairs = [(i, j, (1 << i) | (1 << j)) for i in range(n) for j in range(n)]
    live = {(0, 0): 1}
    absorbed = [0] * swap.shape[0]
    scale = 1
    steps = 0
    total = 1
    while steps < max_steps:
        # absorbed and live hold integer weights over scale = n^(2 steps)
        if Fraction(total, scale) <= eps:
            break
        new: dict = {}
        absorbed = [a * n * n for a in absorbed]
        for (p, mask), mass in live.items():
            for i, j, bits in pairs:
                q = int(swap[p, i, j])
                m2 = mask | bits
                if m2 == full:
                    absorbed[q] += mass
                else:
                    new[(q, m2)] = new.get((q, m2), 0) + mass
        live = new
        scale *= n * n
        steps += 1
        total = sum(live.values())
        if sum(absorbed) + total != scale:
            raise InvariantError("mass not conserved in stopped recursion")
    return absorbed, live, scale, steps


def exact_stopped_distribution(
    n: int, epsilon: float = 1e-12, exact: bool | None = None, max_steps: int = 100_000
) -> StoppedDistribution:
    """Law of ``X_tau`` up to a certified residual ``<= epsilon``.

    Exact rational arithmetic is the default for ``n <= 4``; ``n = 5, 6`` use
    float64 unless ``exact=True``.
    """
    _check_group_n(n)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if exact is None:
        exact = n <= 4
    perms, _, swap = _group(n)
    if exact:
        absorbed, live, scale, steps = _stopped_exact(n, swap, Fraction(epsilon), max_steps)
        law = GroupDistribution(n, [Fraction(a, scale) for a in absorbed])
        residual = Fraction(sum(live.values()), scale)
        states = [StoppedState(p, m, Fraction(v, scale)) for (p, m), v in sorted(live.items())]
    else:
        absorbed, live, remaining, steps = _stopped_float(n, swap, float(epsilon), max_steps)
        law = GroupDistribution(n, [float(a) for a in absorbed])
        residual = float(remaining)
        states = [
            StoppedState(int(p), int(m), float(live[p, m])) for p, m in zip(*np.nonzero(live))
        ]
    tail = min(1.0, n * ((n - 1) / n) ** (2 * steps)) if n > 1 else 0.0
    return StoppedDistribution(law, residual, steps, tail, states)
