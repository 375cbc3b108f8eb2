import io
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from oracles import brute_force_walk, cycle_type_of
from rtwalk.classdist import ClassDistribution
from rtwalk.errors import TooLargeError
from rtwalk.exact_oracle import (
    convolution_series,
    cycle_type_kernel,
    evolve_class,
    evolve_class_series,
    exact_stopped_distribution,
    exact_tv,
    full_group_convolution,
    get_kernel,
    kernel_self_test,
    walk_class_law,
    write_class_series,
)
from rtwalk.partitions import enumerate_partitions
from rtwalk.simulator import simulate_tau


def test_group_convolution_examples():
    assert full_group_convolution(2, 1).probs == [Fraction(1, 2), Fraction(1, 2)]
    assert full_group_convolution(4, 0)[(0, 1, 2, 3)] == 1
    with pytest.raises(TooLargeError):
        full_group_convolution(7, 1)
    with pytest.raises(ValueError):
        full_group_convolution(3, -1)


@pytest.mark.parametrize("n,t", [(2, 3), (3, 2), (3, 3), (4, 2)])
def test_group_convolution_matches_enumeration(n, t):
    law = full_group_convolution(n, t)
    ref = brute_force_walk(n, t)
    for perm, p in zip(law.perms, law.probs):
        assert p == ref.get(perm, 0)
    assert law.total() == 1


def test_convolution_series_is_consistent():
    series = convolution_series(4, 5)
    assert len(series) == 6
    assert series[5].probs == full_group_convolution(4, 5).probs


def test_kernel_examples():
    assert cycle_type_kernel((1, 1, 1)) == {(2, 1): Fraction(2, 3), (1, 1, 1): Fraction(1, 3)}
    # from a transposition at n = 2: identity with probability 1/2
    assert cycle_type_kernel((2,)) == {(2,): Fraction(1, 2), (1, 1): Fraction(1, 2)}


@pytest.mark.parametrize("n", [3, 8, 15])
def test_kernel_rows_are_stochastic(n):
    kern = get_kernel(n)
    for idx in range(len(enumerate_partitions(n))):
        _, num = kern.row(idx)
        assert int(num.sum()) == kern.denominator


def test_kernel_self_test_runs():
    kernel_self_test(5)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_class_evolution_matches_group_marginal(n):
    series = convolution_series(n, 12)
    for t, law in enumerate(series):
        assert walk_class_law(n, t, exact=True).probs == law.class_marginal().probs


def test_kernel_agrees_with_one_step_of_group_walk():
    n = 5
    for lam, row in ((lam, cycle_type_kernel(lam)) for lam in enumerate_partitions(n)):
        # apply all n^2 pairs to a representative and count cycle types
        perm = []
        start = 0
        for part in lam:
            perm += [start + (k + 1) % part for k in range(part)]
            start += part
        counts: dict = {}
        for i in range(n):
            for j in range(n):
                q = list(perm)
                q[i], q[j] = q[j], q[i]
                ct = cycle_type_of(q)
                counts[ct] = counts.get(ct, 0) + 1
        assert {k: Fraction(v, n * n) for k, v in counts.items()} == row


def test_exact_and_float_evolution_agree():
    n = 14
    a = walk_class_law(n, 30, exact=True).as_float().probs
    b = walk_class_law(n, 30, exact=False).probs
    assert np.max(np.abs(np.asarray(a) - b)) < 1e-14


def test_uniform_is_stationary():
    for n in (5, 11):
        u = ClassDistribution.uniform(n, exact=True)
        assert evolve_class(u, 3).probs == u.probs
    with pytest.raises(ValueError):
        evolve_class(u, -1)


def test_series_and_tv():
    n = 6
    series = evolve_class_series(ClassDistribution.point_mass(n, exact=True), 4)
    assert len(series) == 5
    assert exact_tv(series[0], series[0]) == 0
    assert exact_tv(series[0], ClassDistribution.point_mass(n, (2, 1, 1, 1, 1), exact=True)) == 1
    tvs = [exact_tv(walk_class_law(n, t), ClassDistribution.uniform(n)) for t in range(0, 30, 3)]
    assert all(a >= b for a, b in zip(tvs, tvs[1:]))
    with pytest.raises(ValueError):
        exact_tv(series[0], ClassDistribution.uniform(5))


def test_write_class_series():
    buf = io.StringIO()
    write_class_series(buf, evolve_class_series(ClassDistribution.point_mass(3, exact=True), 1))
    lines = buf.getvalue().splitlines()
    assert lines[0] == "step,partition,probability"
    assert lines[1:4] == ["0,3,0", '0,"2,1",0', '0,"1,1,1",1']
    assert lines[4:] == ["1,3,0", '1,"2,1",2/3', '1,"1,1,1",1/3']


def test_stopped_law_at_three():
    res = exact_stopped_distribution(3, epsilon=1e-15)
    law = res.law
    assert res.residual <= Fraction(1, 10**15)
    assert res.tail_bound >= float(res.residual) * (1 - 1e-12)
    ident = Fraction(1, 20)
    trans = Fraction(5, 36)
    three = Fraction(4, 15)
    assert abs(law[(0, 1, 2)] - ident) <= res.residual
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        assert abs(law[perm] - trans) <= res.residual
    for perm in ((1, 2, 0), (2, 0, 1)):
        assert abs(law[perm] - three) <= res.residual


def test_stopped_law_float_matches_exact():
    a = exact_stopped_distribution(4, epsilon=1e-12, exact=True)
    b = exact_stopped_distribution(4, epsilon=1e-12, exact=False)
    assert np.max(np.abs(np.array([float(p) for p in a.law.probs]) - b.law.probs)) < 1e-12
    assert a.steps == b.steps


def test_stopped_law_matches_simulation():
    n = 4
    law = exact_stopped_distribution(n, epsilon=1e-12).law
    res = simulate_tau(n, 200_000, seed=9)
    idx = np.asarray(res.records["perm_index"])
    observed = np.bincount(idx, minlength=24)
    expected = np.array([float(p) for p in law.probs])
    expected = expected / expected.sum() * len(idx)
    assert stats.chisquare(observed, expected).pvalue > 1e-3
