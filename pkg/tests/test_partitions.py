import math
from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import pentagonal_partition_counts
from rtwalk.partitions import (
    ENUMERATION_CAP,
    Partition,
    centralizer_size,
    class_size,
    conjugate,
    cycle_type,
    dimension,
    enumerate_partitions,
    fixed_point_count,
    hook_lengths,
    iter_partitions,
    partition_count,
    partition_index,
    partition_table,
    truncate,
)


def partitions_of(max_n=20):
    """Hypothesis strategy: a random partition of some n <= max_n."""
    return st.lists(st.integers(1, max_n), min_size=0, max_size=max_n).map(
        lambda parts: Partition(sorted(parts, reverse=True))
    ).filter(lambda lam: 1 <= lam.n <= max_n)


def test_counts_match_pentagonal_recurrence():
    ref = pentagonal_partition_counts(40)
    for n in range(1, 41):
        assert partition_count(n) == ref[n]
    for n in range(1, 25):
        assert len(enumerate_partitions(n)) == ref[n]


def test_enumeration_order_and_uniqueness():
    for n in range(1, 16):
        parts = enumerate_partitions(n)
        assert len(set(parts)) == len(parts)
        assert parts == sorted(parts, reverse=True)
        assert parts[0] == (n,) and parts[-1] == (1,) * n
        assert all(sum(lam) == n for lam in parts)


def test_enumerate_four():
    assert enumerate_partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_enumeration_cap():
    with pytest.raises(ValueError):
        enumerate_partitions(ENUMERATION_CAP + 1)
    with pytest.raises(ValueError):
        enumerate_partitions(0)


def test_partition_validation_and_text_round_trip():
    with pytest.raises(ValueError):
        Partition((1, 2))
    with pytest.raises(ValueError):
        Partition((2, 0))
    lam = Partition((5, 4, 4, 2))
    assert str(lam) == "5,4,4,2"
    assert Partition.parse(str(lam)) == lam
    assert Partition.parse("") == ()
    assert repr(Partition((3, 1))) == "Partition(3, 1)"


def test_hook_lengths_and_small_dimensions():
    assert sorted(hook_lengths((3, 1)), reverse=True) == [4, 2, 1, 1]
    assert dimension((3, 1)) == 3
    assert dimension((2, 2)) == 2
    assert dimension(()) == 1
    for n in range(2, 12):
        assert dimension((n,)) == 1
        assert dimension((1,) * n) == 1
        assert dimension((n - 1, 1)) == n - 1


@pytest.mark.parametrize("n", range(1, 31))
def test_sum_of_squared_dimensions_is_group_order(n):
    if n > 22:
        # stream the larger n instead of caching every partition
        total = sum(dimension(lam) ** 2 for lam in iter_partitions(n))
    else:
        total = sum(dimension(lam) ** 2 for lam in enumerate_partitions(n))
    assert total == factorial(n)


@given(partitions_of(18))
def test_conjugate_is_an_involution(lam):
    assert conjugate(conjugate(lam)) == lam
    assert conjugate(lam).n == lam.n
    assert dimension(conjugate(lam)) == dimension(lam)


@given(partitions_of(16))
def test_dimension_satisfies_branching_rule(lam):
    # d_lam is the sum of d over the diagrams with one corner removed
    if lam.n < 2:
        return
    total = 0
    for i in range(len(lam)):
        if i + 1 == len(lam) or lam[i] > lam[i + 1]:
            smaller = list(lam)
            smaller[i] -= 1
            total += dimension(tuple(p for p in smaller if p > 0))
    assert total == dimension(lam)


def test_truncate():
    assert truncate((5, 3, 1)) == (3, 1)
    assert truncate((4,)) == ()


def test_class_sizes_sum_to_group_order():
    for n in range(1, 13):
        assert sum(class_size(lam) for lam in enumerate_partitions(n)) == factorial(n)
    assert centralizer_size((2, 2, 1)) == 8
    assert class_size((2, 1, 1)) == 6
    assert fixed_point_count((3, 1, 1)) == 2


def test_cycle_type_of_permutation():
    assert cycle_type([1, 0, 2]) == (2, 1)
    assert cycle_type([1, 2, 0, 4, 3]) == (3, 2)
    assert cycle_type(list(range(4))) == (1, 1, 1, 1)


def test_table_matches_python_enumeration():
    for n in (1, 2, 7, 15):
        table = partition_table(n)
        parts = enumerate_partitions(n)
        assert len(table) == len(parts)
        for idx, lam in enumerate(parts):
            assert table.partition(idx) == lam
            assert table.rank(lam) == idx
        assert partition_index(n)[parts[-1]] == len(parts) - 1


def test_log_dimensions_and_centralizers():
    n = 30
    table = partition_table(n)
    logd = table.log_dimensions()
    logz = table.log_centralizers()
    for idx in range(0, len(table), 97):
        lam = table.partition(idx)
        assert logd[idx] == pytest.approx(math.log(dimension(lam)), rel=1e-12, abs=1e-12)
        assert logz[idx] == pytest.approx(math.log(centralizer_size(lam)), rel=1e-12, abs=1e-12)
    assert np.all(table.first_parts() >= 1)
