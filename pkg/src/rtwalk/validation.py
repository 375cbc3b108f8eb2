"""Cross-checks between independent computations of the same quantities.

Each check compares two routes to one number (for example the cycle-type
chain against brute-force convolution over the whole group) and reports
pass or fail.  ``rtwalk validate`` runs them all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .characters import pn_eigenvalue
from .classdist import ClassDistribution
from .errors import InvariantError
from .exact_oracle import (
    GROUP_MAX_N,
    convolution_series,
    evolve_class_series,
    exact_stopped_distribution,
    exact_tv,
    kernel_self_test,
    walk_class_law,
)
from .measures import WalkTime, cutoff_time, mu_class_distribution, nu_class_distribution, prob_untouched_exactly
from .partitions import dimension, enumerate_partitions, fixed_point_count, partition_count
from .spectral import plancherel_tv_bound, walk_spectrum


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _pentagonal_counts(n_max: int) -> list[int]:
    p = [1] + [0] * n_max
    for m in range(1, n_max + 1):
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            p[m] += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                p[m] += sign * p[m - g2]
            k += 1
    return p


def check_partition_counts(n_max: int) -> CheckResult:
    ref = _pentagonal_counts(n_max)
    for n in range(1, n_max + 1):
        got = partition_count(n)
        if got != ref[n] or len(enumerate_partitions(n)) != ref[n]:
            return CheckResult("partition_counts", False, f"n={n}: enumeration {got}, recurrence {ref[n]}")
    return CheckResult("partition_counts", True, f"p(n) matches the pentagonal recurrence for n <= {n_max}")


def check_dimension_squares(n_max: int) -> CheckResult:
    for n in range(1, n_max + 1):
        total = sum(dimension(lam) ** 2 for lam in enumerate_partitions(n))
        if total != factorial(n):
            return CheckResult("dimension_squares", False, f"n={n}: sum d^2 = {total} != {factorial(n)}")
    return CheckResult("dimension_squares", True, f"sum of d_lambda^2 equals n! for n <= {n_max}")


def check_kernel(n_max: int) -> CheckResult:
    try:
        kernel_self_test(min(n_max, GROUP_MAX_N))
    except InvariantError as exc:
        return CheckResult("cycle_type_kernel", False, str(exc))
    return CheckResult("cycle_type_kernel", True, f"class kernel matches brute force for n <= {min(n_max, GROUP_MAX_N)}")


def check_class_evolution(n_max: int, t_max: int = 20) -> CheckResult:
    for n in range(1, min(n_max, GROUP_MAX_N) + 1):
        group = convolution_series(n, t_max)
        classes = evolve_class_series(ClassDistribution.point_mass(n, exact=True), t_max)
        for t in range(t_max + 1):
            tv = exact_tv(group[t].class_marginal(), classes[t])
            if tv != 0:
                return CheckResult("class_evolution", False, f"n={n}, t={t}: TV {tv} between class chain and group convolution")
    return CheckResult("class_evolution", True, f"class chain equals group convolution for n <= {min(n_max, GROUP_MAX_N)}, t <= {t_max}")


def check_parseval(n_max: int, t_max: int = 12) -> CheckResult:
    for n in range(2, min(n_max, GROUP_MAX_N) + 1):
        group = convolution_series(n, t_max)
        parts = enumerate_partitions(n)
        for t in range(t_max + 1):
            lhs = factorial(n) * sum(p * p for p in group[t].probs)
            spectrum = walk_spectrum(n, t, exact=True).values
            rhs = sum(dimension(lam) ** 2 * a * a for lam, a in zip(parts, spectrum))
            if lhs != rhs:
                return CheckResult("parseval", False, f"n={n}, t={t}: n! sum f^2 = {lhs}, spectral side {rhs}")
    return CheckResult("parseval", True, f"Parseval identity holds for 2 <= n <= {min(n_max, GROUP_MAX_N)}, t <= {t_max}")


def check_low_characters(n_max: int, t_max: int = 10) -> CheckResult:
    # chi_(n-1,1) = fix - 1 and chi_(1^n) = sign, so their averages under the
    # walk's class law must equal the eigenvalue powers
    for n in range(2, n_max + 1):
        parts = enumerate_partitions(n)
        a_std = pn_eigenvalue((n - 1, 1))
        a_sign = pn_eigenvalue((1,) * n)
        law = ClassDistribution.point_mass(n, exact=True)
        series = evolve_class_series(law, t_max)
        for t, dist in enumerate(series):
            std = sum(p * (fixed_point_count(lam) - 1) for lam, p in zip(parts, dist.probs)) / (n - 1)
            sign = sum(p * (-1) ** (n - len(lam)) for lam, p in zip(parts, dist.probs))
            if std != a_std**t or sign != a_sign**t:
                return CheckResult("low_characters", False, f"n={n}, t={t}: character averages disagree with eigenvalues")
    return CheckResult("low_characters", True, f"standard and sign character averages match eigenvalues for n <= {n_max}")


def check_total_mass(n_max: int) -> CheckResult:
    for n in range(2, n_max + 1):
        for t_prime in (-n, 0, n):
            time = WalkTime(n, max(t_prime, -cutoff_time(n)))
            for name, dist in (
                ("nu", nu_class_distribution(n, time, exact=True)),
                ("mu", mu_class_distribution(n, time, exact=True)),
                ("walk", walk_class_law(n, time.t, exact=True)),
            ):
                if dist.total() != 1:
                    return CheckResult("total_mass", False, f"{name} at n={n}, t'={time.t_prime} has mass {dist.total()}")
    return CheckResult("total_mass", True, f"nu, mu and walk laws have mass 1 for n <= {n_max}")


def check_untouched_partition(n_max: int) -> CheckResult:
    for n in range(1, n_max + 1):
        for t in (0, 1, 3, 7):
            total = sum(comb(n, m) * prob_untouched_exactly(n, t, m, exact=True) for m in range(n + 1))
            if total != 1:
                return CheckResult("untouched_partition", False, f"n={n}, t={t}: untouched-set law sums to {total}")
    return CheckResult("untouched_partition", True, f"untouched-set probabilities sum to 1 for n <= {n_max}")


def check_stopped_two() -> CheckResult:
    law = exact_stopped_distribution(2, 1e-12)
    gap = abs(law.law[(0, 1)] - Fraction(1, 6))
    ok = gap <= Fraction(1, 10**12)
    return CheckResult("stopped_law_n2", ok, f"identity mass at the all-touched time differs from 1/6 by {float(gap):.3g}")


def check_plancherel_dominance(n_max: int) -> CheckResult:
    for n in range(2, n_max + 1):
        c = cutoff_time(n)
        for t in sorted({0, c // 2, c, 2 * c}):
            bound = plancherel_tv_bound(n, t)
            tv = float(exact_tv(walk_class_law(n, t), mu_class_distribution(n, WalkTime.from_t(n, t))))
            if bound + 1e-9 < tv:
                return CheckResult("plancherel_dominance", False, f"n={n}, t={t}: bound {bound!r} < exact TV {tv!r}")
    return CheckResult("plancherel_dominance", True, f"L2 bound dominates exact TV to mu for n <= {n_max}")


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> CheckResult | None:
        return next((c for c in self.checks if not c.passed), None)


def run_validation(n_max: int = 6) -> ValidationReport:
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    checks = [
        check_partition_counts(max(n_max, 30)),
        check_dimension_squares(n_max),
        check_kernel(n_max),
        check_class_evolution(n_max),
        check_parseval(n_max),
        check_low_characters(n_max),
        check_total_mass(n_max),
        check_untouched_partition(n_max),
        check_stopped_two(),
        check_plancherel_dominance(n_max),
    ]
    return ValidationReport(checks)
