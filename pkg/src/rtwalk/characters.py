"""Transposition character ratios and the Fourier eigenvalues of one shuffle step.

For an irreducible representation ``lam`` of S_n the normalised character at a
transposition is ``content(lam) / C(n, 2)``, where ``content`` sums
``column - row`` over the cells of the Young diagram; this equals
``sum_i C(lam_i, 2) - sum_j C(lam'_j, 2)``.

One step of the walk applies the identity with probability ``1/n`` and each
transposition with probability ``2/n^2``.  Its transform at ``lam`` is the
scalar ``1/n + (n-1)/n * ratio``, which simplifies to ``(n + 2*content)/n^2``.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from .partitions import Partition, conjugate, partition_table


def content(lam) -> int:
    """Sum of ``column - row`` over all cells of ``lam``."""
    return sum(comb(p, 2) for p in lam) - sum(comb(p, 2) for p in conjugate(lam))


def transposition_character_ratio(lam) -> Fraction:
    """``chi_lam(tau) / d_lam`` for a transposition ``tau``, exactly.

    >>> transposition_character_ratio(Partition((3, 1)))
    Fraction(1, 3)
    """
    n = sum(lam)
    if n < 2:
        raise ValueError(f"transpositions need n >= 2, got n={n}")
    return Fraction(content(lam), comb(n, 2))


def pn_eigenvalue(lam, n: int | None = None) -> Fraction:
    """Scalar by which one step of the walk acts on the irreducible ``lam``."""
    size = sum(lam)
    if n is None:
        n = size
    elif n != size:
        raise ValueError(f"partition {tuple(lam)} is not a partition of n={n}")
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    return Fraction(n + 2 * content(lam), n * n)


def eigenvalue_array(n: int) -> np.ndarray:
    """Float eigenvalues over all partitions of ``n`` in canonical order."""
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    table = partition_table(n)
    return (n + 2.0 * table.contents()) / float(n * n)


def exact_eigenvalues(n: int) -> list[Fraction]:
    if n < 2:
        raise ValueError(f"the walk needs n >= 2, got n={n}")
    table = partition_table(n)
    return [Fraction(int(n + 2 * c), n * n) for c in table.contents()]

