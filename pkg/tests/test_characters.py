from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import mn_character
from rtwalk.characters import (
    content,
    eigenvalue_array,
    exact_eigenvalues,
    pn_eigenvalue,
    transposition_character_ratio,
)
from rtwalk.partitions import Partition, conjugate, dimension, enumerate_partitions, iter_partitions

partitions = st.lists(st.integers(1, 12), min_size=1, max_size=12).map(
    lambda p: Partition(sorted(p, reverse=True))
).filter(lambda lam: 2 <= lam.n <= 24)


def test_content_examples():
    assert content((3, 1)) == 2
    assert content((2, 2)) == 0
    assert content((4,)) == 6
    assert content((1, 1, 1)) == -3


def test_ratio_examples():
    assert transposition_character_ratio((3, 1)) == Fraction(1, 3)
    assert transposition_character_ratio((2, 2)) == 0
    with pytest.raises(ValueError):
        transposition_character_ratio((1,))


@pytest.mark.parametrize("n", range(2, 10))
def test_ratio_matches_murnaghan_nakayama(n):
    mu = (2,) + (1,) * (n - 2)
    for lam in enumerate_partitions(n):
        assert transposition_character_ratio(lam) == Fraction(mn_character(tuple(lam), mu), dimension(lam))


@given(partitions)
def test_ratio_is_antisymmetric_under_conjugation(lam):
    assert transposition_character_ratio(conjugate(lam)) == -transposition_character_ratio(lam)


@given(partitions)
def test_eigenvalue_bounds(lam):
    a = pn_eigenvalue(lam)
    assert -1 < a <= 1
    assert a == Fraction(1, lam.n) + Fraction(lam.n - 1, lam.n) * transposition_character_ratio(lam)


def test_eigenvalue_examples():
    assert pn_eigenvalue((3, 1)) == Fraction(1, 2)
    assert pn_eigenvalue((1, 1, 1, 1)) == Fraction(-1, 2)
    for n in range(2, 15):
        assert pn_eigenvalue((n,)) == 1
        assert pn_eigenvalue((1,) * n) == Fraction(2, n) - 1
    with pytest.raises(ValueError):
        pn_eigenvalue((3, 1), n=5)


def test_large_first_row_expansion():
    # ratio = 1 - 2k/n + O(k^2/n^2) with k = n - lam_1; constant calibrated on n in [20, 80], k <= 6
    for n in range(20, 81, 10):
        for lam in iter_partitions(n):
            k = n - lam[0]
            if k > 6:
                break
            if k == 0:
                continue
            gap = abs(float(transposition_character_ratio(lam)) - (1 - 2 * k / n))
            assert gap <= 3 * k * k / (n * n)


def test_float_eigenvalues_match_exact():
    n = 40
    exact = np.array([float(a) for a in exact_eigenvalues(n)])
    assert np.max(np.abs(eigenvalue_array(n) - exact)) < 1e-12
    for lam, a in zip(enumerate_partitions(12), exact_eigenvalues(12)):
        assert a == pn_eigenvalue(lam)
