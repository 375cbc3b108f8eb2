"""Probability vectors over cycle types (class functions on S_n)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .partitions import (
    Partition,
    class_size,
    enumerate_partitions,
    fixed_point_count,
    partition_index,
    partition_table,
)

# Exact rationals are used by default up to this n; floats above.
EXACT_MAX_N = 20


def use_exact(n: int, exact: bool | None) -> bool:
    return n <= EXACT_MAX_N if exact is None else bool(exact)


@dataclass
class ClassDistribution:
    """Law of a conjugation-invariant random permutation, one entry per cycle type.

    ``probs`` is dense in canonical partition order: a list of ``Fraction`` in
    exact mode, a float64 array otherwise.  Because the law is constant on
    classes, ``probs[i]`` is the total mass of class ``i``, not the mass of a
    single permutation.
    """

    n: int
    probs: list | np.ndarray

    @property
    def exact(self) -> bool:
        return isinstance(self.probs, list)

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, lam):
        return self.probs[partition_index(self.n)[Partition(lam)]]

    def partitions(self) -> list[Partition]:
        return enumerate_partitions(self.n)

    def items(self):
        return zip(self.partitions(), self.probs)

    def total(self):
        if self.exact:
            return sum(self.probs, Fraction(0))
        import math

        return math.fsum(self.probs)

    def as_float(self) -> "ClassDistribution":
        if not self.exact:
            return self
        return ClassDistribution(self.n, np.array([float(p) for p in self.probs]))

    def fixed_point_marginal(self) -> list:
        """Law of the number of fixed points, indexed by ``0..n``."""
        zero = Fraction(0) if self.exact else 0.0
        out = [zero] * (self.n + 1)
        for lam, p in self.items():
            out[fixed_point_count(lam)] += p
        return out

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["partition", "class_size", "probability"])
        for lam, p in self.items():
            writer.writerow([str(lam), class_size(lam), _fmt(p)])

    @classmethod
    def point_mass(cls, n: int, lam=None, exact: bool | None = None) -> "ClassDistribution":
        """All mass on one class; the identity class ``(1,...,1)`` by default."""
        if lam is None:
            lam = (1,) * n
        idx = partition_index(n)[Partition(lam)]
        if use_exact(n, exact):
            probs = [Fraction(0)] * len(partition_index(n))
            probs[idx] = Fraction(1)
        else:
            probs = np.zeros(len(partition_index(n)))
            probs[idx] = 1.0
        return cls(n, probs)

    @classmethod
    def uniform(cls, n: int, exact: bool | None = None) -> "ClassDistribution":
        """Class marginal of the uniform measure: ``class_size / n!``."""
        nf = factorial(n)
        if use_exact(n, exact):
            return cls(n, [Fraction(class_size(lam), nf) for lam in enumerate_partitions(n)])
        return cls(n, uniform_class_array(n))


def uniform_class_array(n: int) -> np.ndarray:
    """Float ``1 / z_lam`` over all cycle types of ``n`` in canonical order."""
    return np.exp(-partition_table(n).log_centralizers())


def _fmt(p) -> str:
    if isinstance(p, Fraction):
        return str(p)
    return repr(float(p))
