"""Monte-Carlo engine for the random transposition walk.

One step draws ``i`` and ``j`` independently and uniformly from ``0..n-1``
(0-based card labels), right-multiplies the current permutation by the
transposition ``(i j)`` (the identity when ``i == j``) and marks both cards
as touched.  Permutations are stored in one-line form, ``perm[k]`` is the
image of ``k``, so right multiplication by ``(i j)`` swaps ``perm[i]`` and
``perm[j]``.

Batch runners give replica ``r`` its own random stream ``(seed, r)``, so
results are identical whatever the number of worker threads.
"""
from __future__ import annotations

import contextlib
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from math import factorial

import numba
import numpy as np
from numba import njit, prange

from .errors import InvariantError
from .measures import cutoff_time, uniform_fixed_point_law
from .partitions import cycle_type_rank, partition_table
from .rng import Stream, normalize_seed, randbelow, random01, seed_stream

SCHEMA_VERSION = 1
# per-replica permutation indices are recorded up to this n (8! = 40320 cells)
PERM_INDEX_MAX_N = 8
# per-replica cycle types are recorded up to this n
CYCLE_TYPE_MAX_N = 20
MIN_STATISTIC_SAMPLES = 10_000
_CHUNK = 256


# --- kernels ----------------------------------------------------------------


@njit(cache=True, inline="always")
def _touch(words, k):
    w = k >> 6
    bit = np.uint64(1) << np.uint64(k & 63)
    if words[w] & bit:
        return 0
    words[w] |= bit
    return 1


@njit(cache=True, inline="always")
def _is_set(words, k):
    return (words[k >> 6] >> np.uint64(k & 63)) & np.uint64(1) == np.uint64(1)


@njit(cache=True, inline="always")
def _swap(perm, i, j):
    tmp = perm[i]
    perm[i] = perm[j]
    perm[j] = tmp


@njit(cache=True)
def fixed_points(perm):
    c = 0
    for k in range(perm.shape[0]):
        if perm[k] == k:
            c += 1
    return c


@njit(cache=True)
def perm_rank(perm):
    """Lexicographic index of ``perm`` among all permutations of its length."""
    n = perm.shape[0]
    r = 0
    for i in range(n):
        smaller = 0
        for j in range(i + 1, n):
            if perm[j] < perm[i]:
                smaller += 1
        r = r * (n - i) + smaller
    return r


def perm_unrank(index: int, n: int) -> np.ndarray:
    """Inverse of :func:`perm_rank`."""
    if not 0 <= index < factorial(n):
        raise ValueError(f"index must lie in [0, {n}!), got {index}")
    digits = []
    for base in range(1, n + 1):
        index, d = divmod(index, base)
        digits.append(d)
    pool = list(range(n))
    return np.array([pool.pop(d) for d in reversed(digits)], dtype=np.int64)


@njit(cache=True)
def _reset(perm, words):
    for k in range(perm.shape[0]):
        perm[k] = k
    for w in range(words.shape[0]):
        words[w] = 0


@njit(cache=True)
def _run_steps(n, t, s, perm, words):
    # returns (cards newly touched, steps that were not the identity)
    new = 0
    moves = 0
    for _ in range(t):
        i = randbelow(s, n)
        j = randbelow(s, n)
        new += _touch(words, i) + _touch(words, j)
        _swap(perm, i, j)
        if i != j:
            moves += 1
    return new, moves


@njit(cache=True)
def _touch_only(n, t, s, words):
    # the walk's touched set without maintaining the permutation
    new = 0
    for _ in range(t):
        i = randbelow(s, n)
        j = randbelow(s, n)
        new += _touch(words, i) + _touch(words, j)
    return new


@njit(cache=True)
def _until_all_touched(n, s, perm, words, remaining, start):
    # returns (tau, fixed points one step before tau)
    t = start
    while True:
        i = randbelow(s, n)
        j = randbelow(s, n)
        t += 1
        new = _touch(words, i) + _touch(words, j)
        if new == remaining:
            before = fixed_points(perm)
            _swap(perm, i, j)
            return t, before
        remaining -= new
        _swap(perm, i, j)


@njit(cache=True)
def _mark(marked, a, b):
    # Broder marking rule; returns 1 when a new element becomes marked
    if a == b:
        if not marked[a]:
            marked[a] = True
            return 1
        return 0
    if marked[a] and not marked[b]:
        marked[b] = True
        return 1
    if marked[b] and not marked[a]:
        marked[a] = True
        return 1
    return 0


@njit(cache=True)
def _marking(n, t_star, s, z, y, words, in_s, s_list, marked_z, marked_y):
    """Run the walk to ``t_star`` then the coupled Q/P marking processes.

    Returns ``(kappa, tau_m, |S|, replaced)`` where ``replaced`` counts steps at
    which the coupling of the Q-step to the P-step failed.
    """
    for w in range(words.shape[0]):
        words[w] = 0
    _touch_only(n, t_star, s, words)
    m = 0
    for k in range(n):
        z[k] = k
        if _is_set(words, k):
            in_s[k] = False
            marked_z[k] = True
            marked_y[k] = True
        else:
            in_s[k] = True
            marked_z[k] = False
            marked_y[k] = False
            s_list[m] = k
            m += 1
    # uniform permutation of the touched cards, untouched ones fixed
    touched = n - m
    order = np.empty(touched, dtype=np.int64)
    c = 0
    for k in range(n):
        if not in_s[k]:
            order[c] = k
            c += 1
    for a in range(touched - 1, 0, -1):
        b = randbelow(s, a + 1)
        _swap(z, order[a], order[b])
    for k in range(n):
        y[k] = z[k]
    # Q puts 2c on each transposition and on each (k k) with k in S, and the
    # rest of the mass on loops outside S; when 2|S| > n that rest would be
    # negative, so the loops outside S get weight 0 and c shrinks to match
    c_q = 1.0 / max(n * n, n * (n - 1) + 2 * m)
    keep_pair = c_q * n * n
    if m < n and 2 * m <= n:
        keep_loop = (n - 2.0 * m) / (n - m)
    else:
        keep_loop = 0.0
    left_z = m
    left_y = m
    kappa = t_star if m == 0 else -1
    tau_m = t_star if m == 0 else -1
    replaced = 0
    t = t_star
    while kappa < 0 or tau_m < 0:
        t += 1
        i = randbelow(s, n)
        j = randbelow(s, n)
        if tau_m < 0:
            _swap(y, i, j)
            left_y -= _mark(marked_y, i, j)
            if left_y == 0:
                tau_m = t
        qi = i
        qj = j
        if i != j:
            if keep_pair < 1.0 and random01(s) >= keep_pair:
                qi = s_list[randbelow(s, m)]
                qj = qi
        elif not in_s[i]:
            if keep_loop < 1.0 and random01(s) >= keep_loop:
                qi = s_list[randbelow(s, m)]
                qj = qi
        if qi != i or qj != j:
            replaced += 1
        if kappa < 0:
            _swap(z, qi, qj)
            left_z -= _mark(marked_z, qi, qj)
            if left_z == 0:
                kappa = t
    return kappa, tau_m, m, replaced


@njit(parallel=True, cache=True)
def _batch_tau(n, seed, count, counts, tau, fix_tau, fix_prev, ctype, pindex):
    chunks = (count + _CHUNK - 1) // _CHUNK
    for c in prange(chunks):
        s = np.zeros(4, dtype=np.uint64)
        perm = np.empty(n, dtype=np.int64)
        words = np.zeros((n + 63) // 64, dtype=np.uint64)
        seen = np.empty(n, dtype=np.bool_)
        buf = np.empty(n, dtype=np.int64)
        for r in range(c * _CHUNK, min(count, (c + 1) * _CHUNK)):
            seed_stream(seed, r, s)
            _reset(perm, words)
            t, before = _until_all_touched(n, s, perm, words, n, 0)
            tau[r] = t
            fix_prev[r] = before
            fix_tau[r] = fixed_points(perm)
            if ctype.shape[0] > 0:
                ctype[r] = cycle_type_rank(perm, counts, seen, buf)
            if pindex.shape[0] > 0:
                pindex[r] = perm_rank(perm)


@njit(parallel=True, cache=True)
def _batch_fixed(n, t, seed, count, counts, fix, untouched, ctype, pindex):
    chunks = (count + _CHUNK - 1) // _CHUNK
    for c in prange(chunks):
        s = np.zeros(4, dtype=np.uint64)
        perm = np.empty(n, dtype=np.int64)
        words = np.zeros((n + 63) // 64, dtype=np.uint64)
        seen = np.empty(n, dtype=np.bool_)
        buf = np.empty(n, dtype=np.int64)
        for r in range(c * _CHUNK, min(count, (c + 1) * _CHUNK)):
            seed_stream(seed, r, s)
            _reset(perm, words)
            untouched[r] = n - _run_steps(n, t, s, perm, words)[0]
            fix[r] = fixed_points(perm)
            if ctype.shape[0] > 0:
                ctype[r] = cycle_type_rank(perm, counts, seen, buf)
            if pindex.shape[0] > 0:
                pindex[r] = perm_rank(perm)


@njit(parallel=True, cache=True)
def _batch_marking(n, t_star, seed, count, kappa, tau_m, size_s, replaced, z_fix, y_fix, z_index, y_index):
    chunks = (count + _CHUNK - 1) // _CHUNK
    for c in prange(chunks):
        s = np.zeros(4, dtype=np.uint64)
        z = np.empty(n, dtype=np.int64)
        y = np.empty(n, dtype=np.int64)
        words = np.zeros((n + 63) // 64, dtype=np.uint64)
        in_s = np.empty(n, dtype=np.bool_)
        s_list = np.empty(n, dtype=np.int64)
        mz = np.empty(n, dtype=np.bool_)
        my = np.empty(n, dtype=np.bool_)
        for r in range(c * _CHUNK, min(count, (c + 1) * _CHUNK)):
            seed_stream(seed, r, s)
            k, tm, m, rep = _marking(n, t_star, s, z, y, words, in_s, s_list, mz, my)
            kappa[r] = k
            tau_m[r] = tm
            size_s[r] = m
            replaced[r] = rep
            z_fix[r] = fixed_points(z)
            y_fix[r] = fixed_points(y)
            if z_index.shape[0] > 0:
                z_index[r] = perm_rank(z)
                y_index[r] = perm_rank(y)


@njit(parallel=True, cache=True)
def _batch_untouched(n, t, seed, count, size_t, size_m, superset, exactly, untouched):
    chunks = (count + _CHUNK - 1) // _CHUNK
    for c in prange(chunks):
        s = np.zeros(4, dtype=np.uint64)
        words = np.zeros((n + 63) // 64, dtype=np.uint64)
        for r in range(c * _CHUNK, min(count, (c + 1) * _CHUNK)):
            seed_stream(seed, r, s)
            for w in range(words.shape[0]):
                words[w] = 0
            untouched[r] = n - _touch_only(n, t, s, words)
            ok = True
            for k in range(size_t):
                if _is_set(words, k):
                    ok = False
                    break
            superset[r] = ok
            ok = untouched[r] == size_m
            if ok:
                for k in range(size_m):
                    if _is_set(words, k):
                        ok = False
                        break
            exactly[r] = ok


@njit(cache=True)
def _rejection(n, t, seed, target, max_attempts, fixed_set, require_exact, out):
    # sequential in the attempt index, so the accepted sample is reproducible
    s = np.zeros(4, dtype=np.uint64)
    perm = np.empty(n, dtype=np.int64)
    words = np.zeros((n + 63) // 64, dtype=np.uint64)
    accepted = 0
    attempts = 0
    while accepted < target and attempts < max_attempts:
        seed_stream(seed, attempts, s)
        attempts += 1
        _reset(perm, words)
        touched = _run_steps(n, t, s, perm, words)[0]
        ok = True
        for k in fixed_set:
            if _is_set(words, k):
                ok = False
                break
        if ok and require_exact and n - touched != fixed_set.shape[0]:
            ok = False
        if ok:
            out[accepted, :] = perm
            accepted += 1
    return accepted, attempts


# --- single-walk interface --------------------------------------------------


class WalkState:
    """Current permutation, touched set and step count of one walk.

    ``touched`` is a bitset packed into 64-bit words.  ``moves`` counts the
    steps that applied a genuine transposition, which fixes the sign of
    ``perm``.
    """

    def __init__(self, n: int, rng: Stream | None = None):
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        self.n = n
        self.perm = np.arange(n, dtype=np.int64)
        self.touched = np.zeros((n + 63) // 64, dtype=np.uint64)
        self.step = 0
        self.moves = 0
        self.rng = rng

    def is_touched(self, k: int) -> bool:
        return bool(_is_set(self.touched, k))

    def touched_set(self) -> set[int]:
        return {k for k in range(self.n) if self.is_touched(k)}

    def untouched_set(self) -> set[int]:
        return {k for k in range(self.n) if not self.is_touched(k)}

    def untouched_count(self) -> int:
        bits = sum(bin(int(w)).count("1") for w in self.touched)
        return self.n - bits

    def fixed_points(self) -> int:
        return int(fixed_points(self.perm))

    def check(self) -> None:
        """Raise :class:`InvariantError` unless ``perm`` is a bijection of the right sign."""
        if not np.array_equal(np.sort(self.perm), np.arange(self.n)):
            raise InvariantError(f"state at step {self.step} is not a permutation")
        if permutation_sign(self.perm) != (-1) ** self.moves:
            raise InvariantError(f"sign of state at step {self.step} disagrees with {self.moves} transpositions")


def permutation_sign(perm) -> int:
    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    parity = 0
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        parity += length - 1
    return -1 if parity % 2 else 1


def step(state: WalkState, i: int | None = None, j: int | None = None) -> WalkState:
    """Advance ``state`` by one step in place and return it.

    Pass both ``i`` and ``j`` to force the chosen pair; otherwise they are drawn
    from ``state.rng``.
    """
    if (i is None) != (j is None):
        raise ValueError("give both i and j or neither")
    if i is None:
        if state.rng is None:
            raise ValueError("state has no random stream; pass i and j")
        i = state.rng.randbelow(state.n)
        j = state.rng.randbelow(state.n)
    if not (0 <= i < state.n and 0 <= j < state.n):
        raise ValueError(f"indices must lie in [0, {state.n}), got ({i}, {j})")
    _touch(state.touched, i)
    _touch(state.touched, j)
    _swap(state.perm, i, j)
    state.step += 1
    if i != j:
        state.moves += 1
    return state


def run_fixed_time(n: int, t: int, rng: Stream) -> WalkState:
    """``t`` steps from the identity."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    state = WalkState(n, rng)
    _, state.moves = _run_steps(n, t, rng.state, state.perm, state.touched)
    state.step = t
    return state


def run_until_all_touched(n: int, rng: Stream) -> tuple[int, np.ndarray, int]:
    """Run from the identity until every card has been touched.

    Returns ``(tau, X_tau, fixed points of X_{tau-1})``.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    perm = np.arange(n, dtype=np.int64)
    words = np.zeros((n + 63) // 64, dtype=np.uint64)
    tau, before = _until_all_touched(n, rng.state, perm, words, n, 0)
    return int(tau), perm, int(before)


def default_t_star(n: int) -> tuple[int, bool]:
    """Start of the marking phase, ``floor(n ln n/2) - n ln ln n/4 + 2 n ln ln ln n``.

    The expression is asymptotic and goes negative (or undefined) for small
    ``n``; it is then clamped to 0.  Returns ``(t_star, clamped)``.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    ll = math.log(math.log(n))
    if ll <= 0:
        return 0, True
    value = cutoff_time(n) - n * ll / 4 + 2 * n * math.log(ll)
    if value < 0:
        return 0, True
    return math.floor(value), False


_SCHEMES = {"Q": "Z", "P": "Y"}


def run_marking(n: int, t_star: int | None, scheme: str, rng: Stream) -> tuple[int, np.ndarray]:
    """One run of the marking construction.

    ``scheme="Q"`` returns ``(kappa_m, Z_kappa)``, the process whose steps come
    from the modified law Q; ``scheme="P"`` returns ``(tau_m, Y_tau_m)`` driven
    by the walk's own law.  Both share the walk up to ``t_star`` and a uniform
    start on the cards touched by then.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"scheme must be 'Q' or 'P', got {scheme!r}")
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if t_star is None:
        t_star = default_t_star(n)[0]
    if t_star < 0:
        raise ValueError(f"t_star must be non-negative, got {t_star}")
    z = np.empty(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    kappa, tau_m, _, _ = _marking(
        n, t_star, rng.state, z, y,
        np.zeros((n + 63) // 64, dtype=np.uint64),
        np.empty(n, dtype=np.bool_), np.empty(n, dtype=np.int64),
        np.empty(n, dtype=np.bool_), np.empty(n, dtype=np.bool_),
    )
    if scheme == "Q":
        return int(kappa), z
    return int(tau_m), y


# --- batches ----------------------------------------------------------------


@contextlib.contextmanager
def thread_count(threads: int | None):
    """Temporarily set the number of numba worker threads."""
    if threads is None:
        yield
        return
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    old = numba.get_num_threads()
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(old)


@dataclass
class BatchResult:
    """Per-replica records of one batch experiment plus its configuration.

    ``records`` maps a field name to an array with one entry per replica.
    """

    kind: str
    n: int
    seed: int
    replicas: int
    config: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for name, arr in self.records.items():
            if len(arr) != self.replicas:
                raise InvariantError(f"record {name!r} has {len(arr)} entries for {self.replicas} replicas")

    def histogram(self, name: str) -> dict[int, int]:
        values, counts = np.unique(self.records[name], return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def mean(self, name: str) -> float:
        return math.fsum(self.records[name].astype(np.float64)) / self.replicas

    def header(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "replicas": self.replicas,
            **self.config,
        }

    def write_jsonl(self, fh) -> None:
        """One JSON object per replica."""
        names = list(self.records)
        columns = [self.records[k].tolist() for k in names]
        for r in range(self.replicas):
            rec = {"schema_version": self.schema_version, "replica": r}
            for name, col in zip(names, columns):
                rec[name] = col[r]
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")

    def write_aggregate_csv(self, fh) -> None:
        """Histogram of every recorded field: ``field,value,count``."""
        fh.write(f"# schema_version={self.schema_version} kind={self.kind} n={self.n} seed={self.seed} replicas={self.replicas}\n")
        fh.write("field,value,count\n")
        for name in self.records:
            for v, c in self.histogram(name).items():
                fh.write(f"{name},{v},{c}\n")


def _check_batch(n: int, replicas: int, seed: int) -> int:
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if replicas < 1:
        raise ValueError(f"replicas must be positive, got {replicas}")
    return normalize_seed(seed)


def _optional(flag: bool, size: int) -> np.ndarray:
    return np.empty(size if flag else 0, dtype=np.int64)


def simulate_tau(n: int, replicas: int, seed: int, threads: int | None = None) -> BatchResult:
    """Hitting time of the all-touched event, with fixed points at ``tau`` and ``tau - 1``.

    Small ``n`` also records the cycle type (canonical partition index) and
    the permutation index of ``X_tau``.
    """
    seed = _check_batch(n, replicas, seed)
    counts = partition_table(n).counts if n <= CYCLE_TYPE_MAX_N else np.zeros((1, 1), dtype=np.int64)
    tau = np.empty(replicas, dtype=np.int64)
    fix_tau = np.empty(replicas, dtype=np.int64)
    fix_prev = np.empty(replicas, dtype=np.int64)
    ctype = _optional(n <= CYCLE_TYPE_MAX_N, replicas)
    pindex = _optional(n <= PERM_INDEX_MAX_N, replicas)
    with thread_count(threads):
        _batch_tau(n, np.uint64(seed), replicas, counts, tau, fix_tau, fix_prev, ctype, pindex)
    records = {"tau": tau, "fix_tau": fix_tau, "fix_prev": fix_prev}
    if ctype.size:
        records["cycle_type"] = ctype
    if pindex.size:
        records["perm_index"] = pindex
    return BatchResult("tau", n, seed, replicas, {}, records)


def simulate_fixed_time(n: int, t: int, replicas: int, seed: int, threads: int | None = None) -> BatchResult:
    """``replicas`` independent copies of ``X_t``."""
    seed = _check_batch(n, replicas, seed)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    counts = partition_table(n).counts if n <= CYCLE_TYPE_MAX_N else np.zeros((1, 1), dtype=np.int64)
    fix = np.empty(replicas, dtype=np.int64)
    untouched = np.empty(replicas, dtype=np.int64)
    ctype = _optional(n <= CYCLE_TYPE_MAX_N, replicas)
    pindex = _optional(n <= PERM_INDEX_MAX_N, replicas)
    with thread_count(threads):
        _batch_fixed(n, t, np.uint64(seed), replicas, counts, fix, untouched, ctype, pindex)
    records = {"fix": fix, "untouched": untouched}
    if ctype.size:
        records["cycle_type"] = ctype
    if pindex.size:
        records["perm_index"] = pindex
    return BatchResult("fixed_time", n, seed, replicas, {"t": t}, records)


def simulate_marking(
    n: int, replicas: int, seed: int, t_star: int | None = None, threads: int | None = None
) -> BatchResult:
    """Coupled marking processes: ``kappa`` (Q-driven), ``tau_m`` (walk-driven) and their end states."""
    seed = _check_batch(n, replicas, seed)
    clamped = False
    if t_star is None:
        t_star, clamped = default_t_star(n)
    if t_star < 0:
        raise ValueError(f"t_star must be non-negative, got {t_star}")
    arrays = {k: np.empty(replicas, dtype=np.int64) for k in ("kappa", "tau_m", "untouched_at_t_star", "replaced", "z_fix", "y_fix")}
    z_index = _optional(n <= PERM_INDEX_MAX_N, replicas)
    y_index = _optional(n <= PERM_INDEX_MAX_N, replicas)
    with thread_count(threads):
        _batch_marking(
            n, t_star, np.uint64(seed), replicas,
            arrays["kappa"], arrays["tau_m"], arrays["untouched_at_t_star"], arrays["replaced"],
            arrays["z_fix"], arrays["y_fix"], z_index, y_index,
        )
    if z_index.size:
        arrays["z_index"] = z_index
        arrays["y_index"] = y_index
    config = {"t_star": t_star, "t_star_clamped": clamped}
    return BatchResult("marking", n, seed, replicas, config, arrays)


def coupling_failure_frequency(result: BatchResult) -> float:
    """Fraction of replicas with ``kappa != tau_m``."""
    return float(np.mean(result.records["kappa"] != result.records["tau_m"]))


@dataclass
class UntouchedFrequencies:
    """Empirical frequency of ``{0..size_t-1} untouched`` and of ``untouched set == {0..size_m-1}``."""

    n: int
    t: int
    replicas: int
    superset_hits: int
    exactly_hits: int
    untouched: np.ndarray

    @property
    def superset_frequency(self) -> float:
        return self.superset_hits / self.replicas

    @property
    def exactly_frequency(self) -> float:
        return self.exactly_hits / self.replicas


def untouched_frequencies(
    n: int, t: int, size_t: int, size_m: int, replicas: int, seed: int, threads: int | None = None
) -> UntouchedFrequencies:
    seed = _check_batch(n, replicas, seed)
    if not (0 <= size_t <= n and 0 <= size_m <= n):
        raise ValueError("set sizes must lie in [0, n]")
    superset = np.empty(replicas, dtype=np.bool_)
    exactly = np.empty(replicas, dtype=np.bool_)
    untouched = np.empty(replicas, dtype=np.int64)
    with thread_count(threads):
        _batch_untouched(n, t, np.uint64(seed), replicas, size_t, size_m, superset, exactly, untouched)
    return UntouchedFrequencies(n, t, replicas, int(superset.sum()), int(exactly.sum()), untouched)


@dataclass
class RejectionSample:
    """Walk states at time ``t`` accepted by a conditioning event."""

    samples: np.ndarray
    attempts: int
    target: int

    @property
    def complete(self) -> bool:
        return len(self.samples) == self.target


def conditional_walk_samples(
    n: int,
    t: int,
    untouched,
    target: int,
    seed: int,
    exactly: bool = False,
    max_attempts: int = 10_000_000,
) -> RejectionSample:
    """Draw ``X_t`` conditioned on the cards in ``untouched`` never being touched.

    With ``exactly=True`` the untouched set must equal ``untouched``.  Attempts
    stop at ``max_attempts``; check :attr:`RejectionSample.complete`.
    """
    seed = _check_batch(n, target, seed)
    fixed = np.array(sorted(set(untouched)), dtype=np.int64)
    if fixed.size and not (0 <= fixed[0] and fixed[-1] < n):
        raise ValueError(f"untouched cards must lie in [0, {n})")
    out = np.empty((target, n), dtype=np.int64)
    accepted, attempts = _rejection(n, t, np.uint64(seed), target, max_attempts, fixed, exactly, out)
    if accepted < target:
        warnings.warn(f"rejection sampling accepted {accepted} of {target} after {attempts} attempts", RuntimeWarning)
    return RejectionSample(out[:accepted], int(attempts), target)


def measure_throughput(n: int = 10_000, steps: int = 20_000_000, seed: int = 0) -> float:
    """Walk steps per second on one core, after a warm-up call."""
    s = Stream(seed)
    perm = np.arange(n, dtype=np.int64)
    words = np.zeros((n + 63) // 64, dtype=np.uint64)
    _run_steps(n, 10, s.state, perm, words)
    start = time.perf_counter()
    _run_steps(n, steps, s.state, perm, words)
    return steps / (time.perf_counter() - start)


# --- statistic-based lower bound on total variation -------------------------


@dataclass
class StatisticTV:
    """Plug-in TV between an empirical statistic law and a reference law."""

    value: float
    half_width: float
    samples: int
    warning: str | None = None

    @property
    def lower(self) -> float:
        return max(0.0, self.value - self.half_width)


def _plugin_tv(counts: np.ndarray, total: int, ref: np.ndarray) -> float:
    return 0.5 * math.fsum(np.abs(counts / total - ref))


def tv_lower_bound_via_statistic(
    samples,
    statistic=None,
    reference_law=None,
    n: int | None = None,
    bootstrap: int = 200,
    seed: int = 0,
) -> StatisticTV:
    """TV between the law of ``statistic(sample)`` and ``reference_law``.

    By the data-processing inequality this lower-bounds the TV distance of
    the full laws.  ``samples`` is a 2-D array of permutations (rows) or a
    1-D array of statistic values.  The default statistic is the fixed-point
    count and the default reference is the fixed-point law of a uniform
    permutation of ``n`` points.  ``half_width`` is half the central 95%
    bootstrap interval.
    """
    samples = np.asarray(samples)
    if statistic is not None:
        values = np.array([statistic(x) for x in samples], dtype=np.int64)
    elif samples.ndim == 2:
        values = (samples == np.arange(samples.shape[1])).sum(axis=1)
        n = samples.shape[1] if n is None else n
    else:
        values = samples.astype(np.int64)
    if reference_law is None:
        if n is None:
            raise ValueError("n is needed for the default fixed-point reference law")
        reference_law = {k: float(uniform_fixed_point_law(n, k)) for k in range(n + 1)}
    elif not isinstance(reference_law, dict):
        reference_law = dict(enumerate(reference_law))
    total = len(values)
    if total == 0:
        raise ValueError("no samples")
    support = sorted(set(reference_law) | set(np.unique(values).tolist()))
    pos = {v: k for k, v in enumerate(support)}
    ref = np.array([float(reference_law.get(v, 0.0)) for v in support])
    idx = np.array([pos[v] for v in values.tolist()], dtype=np.int64)
    counts = np.bincount(idx, minlength=len(support)).astype(np.float64)
    value = _plugin_tv(counts, total, ref)
    gen = np.random.default_rng(seed)
    boot = [_plugin_tv(c, total, ref) for c in gen.multinomial(total, counts / total, size=bootstrap).astype(np.float64)]
    lo, hi = np.quantile(boot, [0.025, 0.975])
    warning = None
    if total < MIN_STATISTIC_SAMPLES:
        warning = f"only {total} samples; at least {MIN_STATISTIC_SAMPLES} recommended"
    return StatisticTV(value, float(hi - lo) / 2, total, warning)
