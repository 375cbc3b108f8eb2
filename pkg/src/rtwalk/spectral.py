"""Fourier side: scalar transforms of class measures and the L2 bound on total variation.

Every measure handled here is a class function, so its transform at an
irreducible ``lam`` is a scalar multiple of the identity.  A
:class:`SpectralVector` stores that scalar for every ``lam``.  The
Plancherel formula turns a difference of two such vectors into an upper
bound on total variation::

    4 d_TV(f1, f2)^2 <= sum_lam d_lam^2 (f1(lam) - f2(lam))^2

Sums run in exact rationals for ``n <= EXACT_MAX_N`` and otherwise in
float64 through ``math.fsum``.  ``fsum`` is correctly rounded, so the result
does not depend on summation order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .characters import eigenvalue_array, exact_eigenvalues
from .classdist import _fmt, use_exact
from .errors import ValidityRangeError
from .measures import WalkTime, mu_cap, truncated_poisson_weights
from .partitions import (
    Partition,
    dimension,
    enumerate_partitions,
    iter_partitions,
    partition_index,
    partition_table,
    truncate,
)


@dataclass
class SpectralVector:
    """Scalar Fourier coefficient per irreducible, dense in canonical partition order."""

    n: int
    values: list | np.ndarray

    @property
    def exact(self) -> bool:
        return isinstance(self.values, list)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, lam):
        return self.values[partition_index(self.n)[Partition(lam)]]

    def items(self):
        return zip(enumerate_partitions(self.n), self.values)

    def write_csv(self, fh) -> None:
        """Columns ``partition, d_lambda, eigenvalue``."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["partition", "d_lambda", "eigenvalue"])
        for lam, v in self.items():
            writer.writerow([str(lam), dimension(lam), _fmt(v)])


def walk_spectrum(n: int, t: int, exact: bool | None = None) -> SpectralVector:
    """Transform of the law of ``X_t``: each one-step eigenvalue raised to ``t``."""
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if use_exact(n, exact):
        return SpectralVector(n, [a**t for a in exact_eigenvalues(n)])
    return SpectralVector(n, eigenvalue_array(n) ** t)


def xi_spectrum_entry(lam, M: int, n: int | None = None) -> Fraction:
    """Transform at ``lam`` of the measure fixing a uniform ``M``-set and uniform elsewhere.

    Zero unless ``lam_1 >= n - M``; otherwise ``d_{lam*} C(M, n - lam_1) / d_lam``
    (Young's rule with a single Kostka number).  Only valid for ``M <= n/3``.
    """
    lam = Partition(lam)
    if n is None:
        n = lam.n
    elif n != lam.n:
        raise ValueError(f"partition {tuple(lam)} is not a partition of n={n}")
    if M < 0:
        raise ValueError(f"M must be non-negative, got {M}")
    if 3 * M > n:
        raise ValidityRangeError(f"closed form holds for M <= n/3; got M={M}, n={n}")
    x = n - lam[0]
    if x > M:
        return Fraction(0)
    return Fraction(dimension(truncate(lam)) * comb(M, x), dimension(lam))


def _resolve_cap(n: int, cap: int | None) -> int:
    if cap is None:
        return mu_cap(n)
    if cap < 0:
        raise ValueError(f"cap must be non-negative, got {cap}")
    if 3 * cap > n:
        raise ValidityRangeError(f"mixture cap must satisfy cap <= n/3; got cap={cap}, n={n}")
    return cap


def _mu_support(n: int, cap: int):
    # partitions with first part >= n - cap form a prefix of the canonical order
    out = []
    for lam in iter_partitions(n):
        if lam[0] < n - cap:
            break
        out.append(lam)
    return out


def mu_spectrum(n: int, t: int, exact: bool | None = None, cap: int | None = None) -> SpectralVector:
    """Transform of ``mu_t``, the Poisson mixture of planted-fixed-point measures.

    The Poisson law is truncated at ``cap``, by default
    ``min(floor((ln n)^2), floor(n/3))``.
    """
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    exact = use_exact(n, exact)
    cap = _resolve_cap(n, cap)
    w = truncated_poisson_weights(WalkTime.from_t(n, t).gamma, cap, exact=exact)
    support = _mu_support(n, cap)
    entries = [sum((w[m] * xi_spectrum_entry(lam, m, n) for m in range(len(w))), Fraction(0)) for lam in support]
    size = len(partition_index(n)) if exact else len(partition_table(n))
    if exact:
        values = entries + [Fraction(0)] * (size - len(entries))
    else:
        values = np.zeros(size)
        values[: len(entries)] = [float(e) for e in entries]
    return SpectralVector(n, values)


def _exact_weighted_sum(n: int, diffs) -> Fraction:
    total = Fraction(0)
    for lam, dv in zip(enumerate_partitions(n), diffs):
        if dv:
            total += dimension(lam) ** 2 * dv * dv
    return total


def plancherel_tv_bound(n: int, t: int, exact: bool | None = None, cap: int | None = None) -> float:
    """Upper bound on ``d_TV(X_t, mu_t)`` from Cauchy-Schwarz and Plancherel."""
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    cap = _resolve_cap(n, cap)
    if use_exact(n, exact):
        walk = walk_spectrum(n, t, exact=True).values
        mu = mu_spectrum(n, t, exact=True, cap=cap).values
        diffs = [a - b for a, b in zip(walk, mu)]
        diffs[0] = Fraction(0)
        return 0.5 * math.sqrt(_exact_weighted_sum(n, diffs))
    table = partition_table(n)
    logd = table.log_dimensions()
    eig = eigenvalue_array(n)
    terms = _log_power_terms(logd, eig, t)
    support = _mu_support(n, cap)
    mu = mu_spectrum(n, t, exact=False, cap=cap).values
    for idx, lam in enumerate(support):
        d = float(dimension(lam))
        terms[idx] = (d * (eig[idx] ** t - mu[idx])) ** 2
    terms[0] = 0.0
    return 0.5 * math.sqrt(math.fsum(terms))


def _log_power_terms(logd: np.ndarray, eig: np.ndarray, t: int) -> np.ndarray:
    # d^2 |a|^(2t), evaluated in log space to avoid overflow of d^2
    if t == 0:
        return np.exp(2.0 * logd)
    with np.errstate(divide="ignore"):
        loga = np.log(np.abs(eig))
    return np.exp(2.0 * logd + 2.0 * t * loga)


def theory_window(n: int) -> float | None:
    """``n (ln ln n / 4 - ln ln ln n)``, the range of ``|t'|`` covered by the asymptotic
    distributional statement; ``None`` where the expression is undefined.

    At desk-scale ``n`` it is tiny or negative, so it is reported, never enforced.
    """
    if n < 3:
        return None
    ll = math.log(math.log(n))
    if ll <= 0:
        return None
    return n * (ll / 4 - math.log(ll))


def large_part_threshold(n: int) -> float:
    """``n - (ln n)^2``: irreducibles with first part at least this form the near-trivial set."""
    return n - math.log(n) ** 2


def tail_sum(n: int, t: int, exact: bool | None = None) -> float:
    """``sum d_lam^2 |a_lam|^(2t)`` over irreducibles with ``lam_1 < n - (ln n)^2``."""
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    cut = large_part_threshold(n)
    if use_exact(n, exact):
        total = Fraction(0)
        for lam, a in zip(enumerate_partitions(n), exact_eigenvalues(n)):
            if lam[0] < cut:
                total += dimension(lam) ** 2 * a ** (2 * t)
        return float(total)
    table = partition_table(n)
    outside = table.first_parts() < cut
    if not outside.any():
        return 0.0
    terms = _log_power_terms(table.log_dimensions()[outside], eigenvalue_array(n)[outside], t)
    return math.fsum(terms)
