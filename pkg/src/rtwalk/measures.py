"""Closed-form reference laws around the cutoff window.

The reference measure ``nu`` plants ``M`` fixed points, ``M`` drawn from a
Poisson(gamma) law truncated at ``cap``, on a uniformly chosen subset and
fills the remaining points with a uniform permutation.  Here
``gamma = exp(-2 t' / n)`` and ``t = floor(n ln n / 2) + t'``.

Probabilities are exact ``Fraction`` values for ``n <= EXACT_MAX_N`` (or when
``exact=True``) and floats otherwise.  ``gamma`` is transcendental for
``t' != 0``; in exact mode it enters as the exact rational value of its
float64 rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np
from numba import njit
from scipy import stats

from . import classdist
from .classdist import ClassDistribution, use_exact
from .partitions import centralizer_size, enumerate_partitions, fixed_point_count, partition_table
from .rng import random01, randbelow, seed_stream


def cutoff_time(n: int) -> int:
    """``floor(n ln n / 2)``, the centre of the cutoff window."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return math.floor(n * math.log(n) / 2)


def gamma(n: int, t_prime: float) -> float:
    """``exp(-2 t' / n)``: mean number of planted fixed points at offset ``t'``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return math.exp(-2.0 * t_prime / n)


def default_nu_cap(n: int) -> int:
    """Default Poisson truncation for ``nu``: ``min(floor((ln n)^2), n)``."""
    return min(math.floor(math.log(n) ** 2), n)


def mu_cap(n: int) -> int:
    """Poisson truncation for the spectral measure ``mu``: ``min(floor((ln n)^2), floor(n/3))``."""
    return min(math.floor(math.log(n) ** 2), n // 3)


@dataclass(frozen=True)
class WalkTime:
    """A time of the walk written as ``t = floor(n ln n / 2) + t_prime``."""

    n: int
    t_prime: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"t' = {self.t_prime} gives negative time for n = {self.n}")

    @classmethod
    def from_t(cls, n: int, t: int) -> "WalkTime":
        return cls(n, t - cutoff_time(n))

    @property
    def t(self) -> int:
        return cutoff_time(self.n) + self.t_prime

    @property
    def gamma(self) -> float:
        return gamma(self.n, self.t_prime)


def _gamma_of(time) -> float:
    return time.gamma if isinstance(time, WalkTime) else float(time)


def truncated_poisson_weights(gamma_value, cap: int, exact: bool = False) -> list:
    """Poisson(gamma) masses on ``0..cap`` renormalised to sum to one."""
    if cap < 0:
        raise ValueError(f"cap must be non-negative, got {cap}")
    if gamma_value < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma_value}")
    if exact:
        g = Fraction(gamma_value)
        raw = [g**x / factorial(x) for x in range(cap + 1)]
        total = sum(raw)
        return [r / total for r in raw]
    # the common exp(-gamma) factor cancels in the normalisation
    raw = [1.0]
    for x in range(1, cap + 1):
        raw.append(raw[-1] * gamma_value / x)
    total = math.fsum(raw)
    return [r / total for r in raw]


def truncated_poisson_pmf(gamma_value, cap: int, x: int, exact: bool = False):
    """``P[Pois(gamma) = x] / P[Pois(gamma) <= cap]``.

    >>> truncated_poisson_pmf(1, 2, 1, exact=True)
    Fraction(2, 5)
    """
    if not 0 <= x <= cap:
        raise ValueError(f"x must lie in [0, cap={cap}], got {x}")
    return truncated_poisson_weights(gamma_value, cap, exact)[x]


def _planted_weights(n: int, gamma_value, cap: int, exact: bool) -> list:
    # g[f] = sum_r w_r * f! / (f - r)!, so that nu(sigma) = g[|Fix sigma|] / n!
    w = truncated_poisson_weights(gamma_value, cap, exact)
    zero = Fraction(0) if exact else 0.0
    g = []
    for f in range(n + 1):
        acc = zero
        falling = 1
        for r in range(min(f, cap) + 1):
            acc += w[r] * falling
            falling *= f - r
        g.append(acc)
    return g


def nu_pmf_by_fixed_count(n: int, time, f: int, cap: int | None = None, exact: bool | None = None):
    """Probability that ``nu`` assigns to one permutation with ``f`` fixed points.

    ``time`` is a :class:`WalkTime` or a bare value of gamma.
    """
    if not 0 <= f <= n:
        raise ValueError(f"fixed-point count must lie in [0, {n}], got {f}")
    if cap is None:
        cap = default_nu_cap(n)
    cap = min(cap, n)
    exact = use_exact(n, exact)
    g = _planted_weights(n, _gamma_of(time), cap, exact)[f]
    if exact:
        return g / factorial(n)
    return g * math.exp(-math.lgamma(n + 1))


def nu_class_distribution(n: int, time, cap: int | None = None, exact: bool | None = None) -> ClassDistribution:
    """Cycle-type law of ``nu``: ``class_size * nu_pmf_by_fixed_count``."""
    if cap is None:
        cap = default_nu_cap(n)
    cap = min(cap, n)
    exact = use_exact(n, exact)
    g = _planted_weights(n, _gamma_of(time), cap, exact)
    if exact:
        probs = [g[fixed_point_count(lam)] / centralizer_size(lam) for lam in enumerate_partitions(n)]
        return ClassDistribution(n, probs)
    table = partition_table(n)
    fixed = (table.parts == 1).sum(axis=1)
    probs = np.asarray(g)[fixed] * classdist.uniform_class_array(n)
    return ClassDistribution(n, probs)


def mu_class_distribution(n: int, time, exact: bool | None = None) -> ClassDistribution:
    """``nu`` truncated at :func:`mu_cap`; the measure compared against in spectral bounds."""
    return nu_class_distribution(n, time, cap=mu_cap(n), exact=exact)


@njit(cache=True)
def _sample_nu_into(n, cum, s, out, scratch):
    u = random01(s)
    m = 0
    while m < len(cum) - 1 and u >= cum[m]:
        m += 1
    for i in range(n):
        scratch[i] = i
        out[i] = i
    for i in range(m):
        j = i + randbelow(s, n - i)
        tmp = scratch[i]
        scratch[i] = scratch[j]
        scratch[j] = tmp
    # scratch[m:] is the moving set in random order; send it to a uniform rearrangement
    rest = n - m
    for i in range(rest - 1, 0, -1):
        j = randbelow(s, i + 1)
        a = scratch[m + i]
        b = scratch[m + j]
        tmp = out[a]
        out[a] = out[b]
        out[b] = tmp
    return m


@njit(cache=True)
def _sample_nu_batch(n, cum, seed, first, count, out):
    s = np.zeros(4, dtype=np.uint64)
    scratch = np.empty(n, dtype=np.int64)
    for r in range(count):
        seed_stream(seed, first + r, s)
        _sample_nu_into(n, cum, s, out[r], scratch)


def _cumulative(n: int, time, cap: int | None) -> np.ndarray:
    if cap is None:
        cap = default_nu_cap(n)
    w = truncated_poisson_weights(_gamma_of(time), min(cap, n))
    cum = np.cumsum(w)
    cum[-1] = 1.0
    return cum


def sample_nu(n: int, time, cap: int | None, rng) -> np.ndarray:
    """One permutation drawn from ``nu``; ``rng`` is a :class:`rtwalk.rng.Stream`."""
    out = np.empty(n, dtype=np.int64)
    scratch = np.empty(n, dtype=np.int64)
    _sample_nu_into(n, _cumulative(n, time, cap), rng.state, out, scratch)
    return out


def sample_nu_batch(n: int, time, cap: int | None, size: int, seed: int) -> np.ndarray:
    """``size`` independent draws from ``nu``; draw ``r`` uses stream ``r`` of ``seed``."""
    out = np.empty((size, n), dtype=np.int64)
    _sample_nu_batch(n, _cumulative(n, time, cap), np.uint64(seed), 0, size, out)
    return out


def derangements(m: int) -> int:
    a, b = 1, 0
    if m == 0:
        return 1
    for k in range(2, m + 1):
        a, b = b, (k - 1) * (a + b)
    return b


def uniform_fixed_point_law(n: int, k: int) -> Fraction:
    """Probability that a uniform permutation of ``n`` points has exactly ``k`` fixed points."""
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    return Fraction(comb(n, k) * derangements(n - k), factorial(n))


def _maybe_exact(value: Fraction, n: int, exact: bool | None):
    return value if use_exact(n, exact) else float(value)


def prob_untouched_superset(n: int, t: int, size_T: int, exact: bool | None = None):
    """Probability that ``size_T`` given cards are all untouched after ``t`` steps."""
    if not 0 <= size_T <= n:
        raise ValueError(f"size_T must lie in [0, {n}], got {size_T}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return _maybe_exact(Fraction(n - size_T, n) ** (2 * t), n, exact)


def prob_untouched_exactly(n: int, t: int, M: int, terms: int | None = None, exact: bool | None = None):
    """Probability that the untouched set after ``t`` steps is exactly a given ``M``-set.

    Inclusion-exclusion over the supersets of the ``M``-set.  ``terms`` keeps
    only the supersets with at most ``M + terms`` elements, which gives the
    Bonferroni partial sums.  The alternating sum is formed in exact integer
    arithmetic before any rounding.
    """
    if not 0 <= M <= n:
        raise ValueError(f"M must lie in [0, {n}], got {M}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    free = n - M
    top = free if terms is None else min(free, terms)
    num = 0
    for s in range(top + 1):
        term = comb(free, s) * (free - s) ** (2 * t)
        num += -term if s % 2 else term
    return _maybe_exact(Fraction(num, n ** (2 * t)), n, exact)


def expected_hitting_time(n: int, tol: float = 1e-13) -> float:
    """``E[tau] = sum_{t >= 0} P[tau > t]`` with the series cut once the tail is below ``tol``."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    total = 0.0
    t = 0
    while True:
        tail = 1.0 - float(prob_untouched_exactly(n, t, 0, exact=True))
        total += tail
        # P[tau > t] <= n ((n-1)/n)^{2t}
        if t > 0 and n * ((n - 1) / n) ** (2 * t) < tol:
            return total
        t += 1


def _poisson_support(a: float, b: float, tail: float) -> int:
    hi = max(a, b)
    if hi == 0:
        return 1
    return int(stats.poisson.isf(tail, hi)) + 2


def poisson_tv(a: float, b: float) -> float:
    """Total variation distance between Poisson(a) and Poisson(b)."""
    if a < 0 or b < 0:
        raise ValueError("Poisson means must be non-negative")
    if a == b:
        return 0.0
    k = np.arange(_poisson_support(a, b, 1e-16) + 1)
    pa = stats.poisson.pmf(k, a) if a > 0 else (k == 0).astype(float)
    pb = stats.poisson.pmf(k, b) if b > 0 else (k == 0).astype(float)
    return 0.5 * math.fsum(np.abs(pa - pb))
