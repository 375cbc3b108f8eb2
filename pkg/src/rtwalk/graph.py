"""The graph process coupled to the walk and its largest component.

Every step that picks ``i != j`` adds the edge ``{i, j}``; a step with
``i == j`` touches ``i`` without adding an edge.  Because the walk is a
product of transpositions along edges, each component of the graph is
invariant under the current permutation, so the permutation restricts to
the largest component.

The giant event at time ``t`` holds when the largest component is exactly
the touched set and at most ``(ln n)^2`` cards are untouched.  It fails,
for instance, when a card was touched only through loops.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import InvariantError
from .rng import Stream, normalize_seed, randbelow, seed_stream

_CHUNK = 64


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _union(parent, rank, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return ra


class ComponentTracker:
    """Union-find over ``0..n-1`` with component sizes and loop-touched marks."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        self.n = n
        self.parent = np.arange(n, dtype=np.int64)
        self.rank = np.zeros(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.loop = np.zeros(n, dtype=bool)
        self.largest_size = 1

    def find(self, x: int) -> int:
        return int(_find(self.parent, x))

    def union(self, a: int, b: int) -> int:
        root = int(_union(self.parent, self.rank, self.size, a, b))
        self.largest_size = max(self.largest_size, int(self.size[root]))
        return root

    def component_of(self, x: int) -> list[int]:
        r = self.find(x)
        return [v for v in range(self.n) if self.find(v) == r]

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for v in range(self.n):
            groups.setdefault(self.find(v), []).append(v)
        return sorted(groups.values())

    def largest_component(self) -> list[int]:
        """Vertices of the largest component (ties go to the one holding the smallest vertex).

        When all components are singletons, a loop-touched vertex is preferred.
        """
        if self.largest_size == 1:
            touched = np.flatnonzero(self.loop)
            return [int(touched[0])] if touched.size else [0]
        for v in range(self.n):
            if self.size[self.find(v)] == self.largest_size:
                return self.component_of(v)

    def touched(self) -> np.ndarray:
        """Boolean mask: vertex lies in a non-singleton component or carries a loop."""
        roots = np.array([self.find(v) for v in range(self.n)])
        return (self.size[roots] > 1) | self.loop

    def check(self) -> None:
        roots = {self.find(v) for v in range(self.n)}
        if sum(int(self.size[r]) for r in roots) != self.n:
            raise InvariantError("component sizes do not sum to n")
        if max(int(self.size[r]) for r in roots) != self.largest_size:
            raise InvariantError("largest component size is stale")


def track_step(tracker: ComponentTracker, i: int, j: int) -> ComponentTracker:
    """Record the pair chosen at one step: an edge when ``i != j``, a loop mark otherwise."""
    if not (0 <= i < tracker.n and 0 <= j < tracker.n):
        raise ValueError(f"indices must lie in [0, {tracker.n}), got ({i}, {j})")
    if i == j:
        tracker.loop[i] = True
    else:
        tracker.union(i, j)
    return tracker


def giant_threshold(n: int) -> float:
    """Largest number of untouched cards allowed by the giant event, ``(ln n)^2``."""
    return math.log(n) ** 2


def giant_event_holds(tracker: ComponentTracker) -> bool:
    touched = tracker.touched()
    count = int(touched.sum())
    if count == 0 or tracker.n - count > giant_threshold(tracker.n):
        return False
    comp = tracker.largest_component()
    return len(comp) == count and bool(touched[comp].all())


def restricted_permutation(perm, tracker: ComponentTracker) -> tuple[np.ndarray, list[int]]:
    """The permutation induced on the largest component, relabelled to ``0..m-1``.

    Returns ``(restricted, vertices)`` with ``vertices`` sorted, so
    ``restricted[a] = b`` means ``perm[vertices[a]] = vertices[b]``.
    """
    vertices = tracker.largest_component()
    label = {v: a for a, v in enumerate(vertices)}
    out = np.empty(len(vertices), dtype=np.int64)
    for a, v in enumerate(vertices):
        image = int(perm[v])
        if image not in label:
            raise InvariantError(f"permutation moves {v} out of its component to {image}")
        out[a] = label[image]
    return out, vertices


@dataclass
class GiantTrace:
    """Per-step record of one walk: largest component, untouched count, event flag."""

    rows: list[tuple[int, int, int, bool]]

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "largest_component", "untouched", "giant_event"])
        for step, largest, untouched, ok in self.rows:
            writer.writerow([step, largest, untouched, int(ok)])


def trace_giant(n: int, t: int, seed: int, replica: int = 0) -> GiantTrace:
    """Follow one walk step by step; uses the same stream as replica ``replica`` of a batch."""
    rng = Stream(seed, replica)
    tracker = ComponentTracker(n)
    rows = [(0, 1, n, False)]
    for step in range(1, t + 1):
        i = rng.randbelow(n)
        j = rng.randbelow(n)
        track_step(tracker, i, j)
        touched = int(tracker.touched().sum())
        rows.append((step, tracker.largest_size, n - touched, giant_event_holds(tracker)))
    return GiantTrace(rows)


@njit(cache=True)
def _giant_replica(n, t, s, limit, parent, rank, size, loop, perm, out):
    # out = [event holds, largest size, untouched, restricted fixed points]
    for k in range(n):
        parent[k] = k
        rank[k] = 0
        size[k] = 1
        loop[k] = False
        perm[k] = k
    for _ in range(t):
        i = randbelow(s, n)
        j = randbelow(s, n)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
        if i == j:
            loop[i] = True
        else:
            _union(parent, rank, size, i, j)
    best = 0
    best_root = 0
    touched = 0
    first_root = -1
    one_root = True
    for v in range(n):
        r = _find(parent, v)
        if size[r] > best:
            best = size[r]
            best_root = r
        if size[r] > 1 or loop[v]:
            touched += 1
            if first_root < 0:
                first_root = r
            elif r != first_root:
                one_root = False
    if best == 1 and first_root >= 0:
        # only singletons: prefer the smallest loop-touched vertex
        best_root = first_root
    ok = touched > 0 and one_root and n - touched <= limit and size[first_root] == touched
    fixed = 0
    for v in range(n):
        if _find(parent, v) == best_root:
            w = perm[v]
            if _find(parent, w) != best_root:
                return False
            if w == v:
                fixed += 1
    out[0] = 1 if ok else 0
    out[1] = best
    out[2] = n - touched
    out[3] = fixed
    return True


@njit(parallel=True, cache=True)
def _batch_giant(n, t, seed, count, limit, event, largest, untouched, fixed, valid):
    chunks = (count + _CHUNK - 1) // _CHUNK
    for c in prange(chunks):
        s = np.zeros(4, dtype=np.uint64)
        parent = np.empty(n, dtype=np.int64)
        rank = np.empty(n, dtype=np.int64)
        size = np.empty(n, dtype=np.int64)
        loop = np.empty(n, dtype=np.bool_)
        perm = np.empty(n, dtype=np.int64)
        out = np.empty(4, dtype=np.int64)
        for r in range(c * _CHUNK, min(count, (c + 1) * _CHUNK)):
            seed_stream(seed, r, s)
            valid[r] = _giant_replica(n, t, s, limit, parent, rank, size, loop, perm, out)
            event[r] = out[0] == 1
            largest[r] = out[1]
            untouched[r] = out[2]
            fixed[r] = out[3]


@dataclass
class GiantResult:
    """Batch outcome: event indicator, largest-component size, untouched count and
    fixed points of the restricted permutation, one entry per replica."""

    n: int
    t: int
    seed: int
    event: np.ndarray
    largest: np.ndarray
    untouched: np.ndarray
    restricted_fixed: np.ndarray

    @property
    def replicas(self) -> int:
        return len(self.event)

    @property
    def failure_frequency(self) -> float:
        return float(np.count_nonzero(~self.event)) / self.replicas


def simulate_giant(n: int, t: int, replicas: int, seed: int, threads: int | None = None) -> GiantResult:
    """Run ``replicas`` walks for ``t`` steps, tracking the graph process alongside."""
    from .simulator import thread_count

    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if replicas < 1:
        raise ValueError(f"replicas must be positive, got {replicas}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    seed = normalize_seed(seed)
    event = np.empty(replicas, dtype=np.bool_)
    largest = np.empty(replicas, dtype=np.int64)
    untouched = np.empty(replicas, dtype=np.int64)
    fixed = np.empty(replicas, dtype=np.int64)
    valid = np.empty(replicas, dtype=np.bool_)
    with thread_count(threads):
        _batch_giant(n, t, np.uint64(seed), replicas, giant_threshold(n), event, largest, untouched, fixed, valid)
    if not valid.all():
        bad = int(np.flatnonzero(~valid)[0])
        raise InvariantError(f"replica {bad}: permutation does not preserve its largest component")
    return GiantResult(n, t, seed, event, largest, untouched, fixed)


def giant_event_frequency(n: int, t: int, replicas: int, seed: int, threads: int | None = None) -> float:
    """Empirical frequency with which the giant event fails at time ``t``."""
    return simulate_giant(n, t, replicas, seed, threads).failure_frequency


def restricted_fixed_point_law(result: GiantResult) -> dict[int, float]:
    """Reference law for the restricted fixed-point count: a uniform permutation of a
    component whose size follows the empirical law of ``result.largest``."""
    from .measures import uniform_fixed_point_law

    sizes, counts = np.unique(result.largest, return_counts=True)
    law: dict[int, float] = {}
    for m, c in zip(sizes.tolist(), counts.tolist()):
        w = c / result.replicas
        for k in range(m + 1):
            law[k] = law.get(k, 0.0) + w * float(uniform_fixed_point_law(m, k))
    return law
