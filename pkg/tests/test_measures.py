import math
from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from oracles import brute_force_untouched_exactly
from rtwalk.classdist import ClassDistribution
from rtwalk.exact_oracle import exact_tv
from rtwalk.measures import (
    WalkTime,
    cutoff_time,
    default_nu_cap,
    derangements,
    expected_hitting_time,
    gamma,
    mu_cap,
    mu_class_distribution,
    nu_class_distribution,
    nu_pmf_by_fixed_count,
    poisson_tv,
    prob_untouched_exactly,
    prob_untouched_superset,
    sample_nu_batch,
    truncated_poisson_pmf,
    truncated_poisson_weights,
    uniform_fixed_point_law,
)


def test_time_coordinates():
    assert cutoff_time(40) == 73
    assert cutoff_time(2) == 0
    assert gamma(10, 0) == 1
    assert gamma(10, 5) == pytest.approx(math.exp(-1))
    w = WalkTime(40, -10)
    assert w.t == 63 and WalkTime.from_t(40, 63) == w
    with pytest.raises(ValueError):
        WalkTime(10, -20)


def test_caps():
    assert default_nu_cap(40) == 13
    assert mu_cap(40) == 13
    assert mu_cap(20) == 6
    assert default_nu_cap(3) == 1


def test_truncated_poisson_examples():
    assert truncated_poisson_pmf(1, 2, 1, exact=True) == Fraction(2, 5)
    w = truncated_poisson_weights(Fraction(1, 2), 4, exact=True)
    assert sum(w) == 1
    with pytest.raises(ValueError):
        truncated_poisson_pmf(1, 2, 3)


@given(st.floats(0.01, 8.0), st.integers(0, 30))
def test_truncated_poisson_matches_scipy(g, cap):
    ref = stats.poisson.pmf(np.arange(cap + 1), g)
    ref = ref / ref.sum()
    assert np.allclose(truncated_poisson_weights(g, cap), ref, rtol=1e-10, atol=1e-300)


def test_nu_small_example():
    # n = 2, cap 2, gamma 1: weights (2/5, 2/5, 1/5); identity gets 4/5
    dist = nu_class_distribution(2, 1.0, cap=2, exact=True)
    assert dist.probs == [Fraction(1, 5), Fraction(4, 5)]


@pytest.mark.parametrize("n", [5, 9, 14])
def test_nu_pmf_sums_to_one_over_group(n):
    time = WalkTime(n, 1)
    total = sum(
        comb(n, f) * derangements(n - f) * nu_pmf_by_fixed_count(n, time, f, exact=True) for f in range(n + 1)
    )
    assert total == 1
    assert nu_class_distribution(n, time).total() == 1


@pytest.mark.parametrize("n", [6, 12])
def test_nu_fixed_point_marginal_matches_mixture(n):
    # planting M points then a uniform permutation of the rest gives
    # P[fix = k] = sum_M w_M P_{n-M}[fix = k - M]
    time = WalkTime(n, -2)
    cap = default_nu_cap(n)
    w = truncated_poisson_weights(time.gamma, cap, exact=True)
    marginal = nu_class_distribution(n, time, exact=True).fixed_point_marginal()
    for k in range(n + 1):
        ref = sum(
            (w[m] * uniform_fixed_point_law(n - m, k - m) for m in range(min(cap, k) + 1)), Fraction(0)
        )
        assert marginal[k] == ref


def test_float_and_exact_nu_agree():
    n = 18
    time = WalkTime(n, 3)
    a = nu_class_distribution(n, time, exact=True).as_float().probs
    b = nu_class_distribution(n, time, exact=False).probs
    assert np.max(np.abs(a - b)) < 1e-15


def test_mu_is_nu_with_smaller_cap():
    n = 12
    time = WalkTime(n, 0)
    assert mu_class_distribution(n, time).probs == nu_class_distribution(n, time, cap=mu_cap(n)).probs


def test_nu_sampler_matches_law():
    n = 10
    time = WalkTime(n, -3)
    draws = sample_nu_batch(n, time, None, 100_000, seed=11)
    assert np.all(np.sort(draws, axis=1) == np.arange(n))
    fix = (draws == np.arange(n)).sum(axis=1)
    marginal = [float(p) for p in nu_class_distribution(n, time).fixed_point_marginal()]
    observed = np.bincount(fix, minlength=n + 1)
    keep = [k for k in range(n + 1) if marginal[k] * len(fix) >= 5]
    exp = np.array([marginal[k] for k in keep] + [1 - sum(marginal[k] for k in keep)]) * len(fix)
    obs = np.array([observed[k] for k in keep] + [len(fix) - observed[keep].sum()])
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_uniform_fixed_point_law():
    assert uniform_fixed_point_law(4, 0) == Fraction(3, 8)
    for n in range(1, 12):
        assert sum(uniform_fixed_point_law(n, k) for k in range(n + 1)) == 1
    assert [derangements(m) for m in range(6)] == [1, 0, 1, 2, 9, 44]


def test_untouched_probability_examples():
    assert prob_untouched_superset(3, 1, 1) == Fraction(4, 9)
    assert prob_untouched_exactly(2, 1, 0) == Fraction(1, 2)
    assert prob_untouched_superset(30, 2, 1, exact=False) == pytest.approx((29 / 30) ** 4)


@pytest.mark.parametrize("n,t", [(2, 3), (3, 2), (4, 2)])
def test_untouched_exactly_matches_enumeration(n, t):
    for m in range(n + 1):
        assert prob_untouched_exactly(n, t, m) == brute_force_untouched_exactly(n, t, m)


@given(st.integers(3, 12), st.integers(1, 25), st.integers(0, 3))
def test_bonferroni_partial_sums_bracket(n, t, m):
    if m > n:
        return
    exact = prob_untouched_exactly(n, t, m, exact=True)
    free = n - m
    for terms in range(free + 1):
        partial = prob_untouched_exactly(n, t, m, terms=terms, exact=True)
        if terms % 2 == 0:
            assert partial >= exact
        else:
            assert partial <= exact


def test_expected_hitting_time():
    assert expected_hitting_time(2) == pytest.approx(5 / 3, abs=1e-12)
    assert expected_hitting_time(50) == pytest.approx(112.73013345823314, rel=1e-9)


def test_poisson_tv():
    assert poisson_tv(2, 1) == pytest.approx(0.32975303263304656, rel=1e-12)
    assert poisson_tv(0, 1) == pytest.approx(1 - math.exp(-1), rel=1e-12)
    assert poisson_tv(1, 1) == 0
    assert poisson_tv(3, 1.5) == pytest.approx(poisson_tv(1.5, 3))
    with pytest.raises(ValueError):
        poisson_tv(-1, 1)


def test_uniform_tv_of_nu_tracks_poisson_profile():
    n = 40
    uniform = ClassDistribution.uniform(n)
    for t_prime in (-n, 0, n):
        time = WalkTime(n, t_prime)
        tv = exact_tv(nu_class_distribution(n, time), uniform)
        assert abs(tv - poisson_tv(1 + time.gamma, 1)) <= 0.03
