"""Command-line driver: one subcommand per experiment, CSV or JSON-lines output.

Time is given either as ``--t-prime`` (offset from the cutoff centre,
``t = floor(n ln n / 2) + t'``, natural log, in steps) or as an absolute
``--t``.  Exit codes: 0 success, 1 usage error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys

import numpy as np
from scipy import stats

from .classdist import ClassDistribution, _fmt
from .errors import TooLargeError, ValidityRangeError
from .exact_oracle import evolve_class, exact_tv, walk_class_law
from .measures import (
    WalkTime,
    cutoff_time,
    default_nu_cap,
    expected_hitting_time,
    mu_class_distribution,
    nu_class_distribution,
    poisson_tv,
    uniform_fixed_point_law,
)
from .simulator import (
    PERM_INDEX_MAX_N,
    coupling_failure_frequency,
    simulate_marking,
    simulate_tau,
    tv_lower_bound_via_statistic,
)
from .spectral import plancherel_tv_bound, tail_sum, theory_window
from .validation import run_validation

EXACT_TV_MAX_N = 60
BRODER_P_THRESHOLD = 1e-3
THREADS_ENV = "RTWALK_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(float(text)) if "e" in text.lower() else int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


# --- output -----------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return _fmt(v) if not isinstance(v, (int, str)) else str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _write_table(fh, columns: list[str], rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        for row in rows:
            fh.write(json.dumps({k: _jsonable(row[k]) for k in columns}, separators=(",", ":")) + "\n")
        return
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_cell(row[k]) for k in columns) + "\n")


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            yield fh


def _times(args, n: int) -> list[WalkTime]:
    if args.t is not None:
        return [WalkTime.from_t(n, t) for t in args.t]
    out = []
    for tp in args.t_prime:
        time = WalkTime(n, tp) if cutoff_time(n) + tp >= 0 else None
        if time is None:
            raise UsageError(f"t' = {tp} gives negative time for n = {n} (cutoff centre {cutoff_time(n)})")
        out.append(time)
    return out


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env is None or env == "":
        return None
    try:
        value = int(env)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return value


# --- subcommands ------------------------------------------------------------


def cmd_exact_tv(args) -> int:
    columns = ["n", "t_prime", "t", "tv_nu", "tv_uniform", "poisson_profile_prediction"]
    rows = []
    for n in args.n:
        if n > EXACT_TV_MAX_N:
            raise TooLargeError(
                f"exact TV supports n <= {EXACT_TV_MAX_N}, got n={n}; use 'rtwalk simulate-tau' for larger n"
            )
        if n < 2:
            raise UsageError(f"n must be at least 2, got {n}")
        times = sorted(_times(args, n), key=lambda w: w.t)
        cap = default_nu_cap(n) if args.cap is None else args.cap
        law = ClassDistribution.point_mass(n)
        uniform = ClassDistribution.uniform(n)
        current = 0
        for time in times:
            law = evolve_class(law, time.t - current)
            current = time.t
            nu = nu_class_distribution(n, time, cap=cap)
            rows.append({
                "n": n,
                "t_prime": time.t_prime,
                "t": time.t,
                "tv_nu": float(exact_tv(law, nu)),
                "tv_uniform": float(exact_tv(law, uniform)),
                "poisson_profile_prediction": poisson_tv(1 + time.gamma, 1),
            })
    with _output(args.out) as fh:
        _write_table(fh, columns, rows, args.format)
    return EXIT_OK


def cmd_l2_bound(args) -> int:
    columns = ["n", "t_prime", "t", "plancherel_tv_bound", "tail_sum", "theory_window", "in_theory_window"]
    if args.with_exact:
        columns.append("exact_tv_mu")
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError(f"n must be at least 2, got {n}")
        window = theory_window(n)
        for time in _times(args, n):
            row = {
                "n": n,
                "t_prime": time.t_prime,
                "t": time.t,
                "plancherel_tv_bound": plancherel_tv_bound(n, time.t, cap=args.cap),
                "tail_sum": tail_sum(n, time.t),
                "theory_window": window,
                "in_theory_window": window is not None and abs(time.t_prime) <= window,
            }
            if args.with_exact:
                if n > EXACT_TV_MAX_N:
                    raise TooLargeError(f"--with-exact supports n <= {EXACT_TV_MAX_N}, got n={n}")
                if args.cap is None:
                    mu = mu_class_distribution(n, time)
                else:
                    mu = nu_class_distribution(n, time, cap=args.cap)
                row["exact_tv_mu"] = float(exact_tv(walk_class_law(n, time.t), mu))
            rows.append(row)
    with _output(args.out) as fh:
        _write_table(fh, columns, rows, args.format)
    return EXIT_OK


def cmd_simulate_tau(args) -> int:
    columns = [
        "n", "replicas", "seed", "mean_tau", "expected_tau", "identity_frequency",
        "stat_tv_tau", "stat_tv_tau_half_width", "stat_tv_prev", "stat_tv_prev_half_width",
        "min_fix_prev",
    ]
    threads = _threads(args)
    rows = []
    results = []
    for n in args.n:
        result = simulate_tau(n, args.replicas, args.seed, threads)
        at_tau = tv_lower_bound_via_statistic(result.records["fix_tau"], n=n)
        before = tv_lower_bound_via_statistic(result.records["fix_prev"], n=n)
        for w in (at_tau.warning, before.warning):
            if w:
                print(f"warning: n={n}: {w}", file=sys.stderr)
        rows.append({
            "n": n,
            "replicas": args.replicas,
            "seed": args.seed,
            "mean_tau": result.mean("tau"),
            "expected_tau": expected_hitting_time(n),
            "identity_frequency": float(np.mean(result.records["fix_tau"] == n)),
            "stat_tv_tau": at_tau.value,
            "stat_tv_tau_half_width": at_tau.half_width,
            "stat_tv_prev": before.value,
            "stat_tv_prev_half_width": before.half_width,
            "min_fix_prev": int(result.records["fix_prev"].min()),
        })
        results.append(result)
    with _output(args.out) as fh:
        _write_table(fh, columns, rows, args.format)
    if args.records:
        with _output(args.records) as fh:
            for result in results:
                result.write_jsonl(fh)
    return EXIT_OK


def _chi_square(values: np.ndarray, n: int) -> tuple[str, float, int, float]:
    if n <= PERM_INDEX_MAX_N:
        counts = np.bincount(values["index"], minlength=math.factorial(n))
        res = stats.chisquare(counts)
        return "permutation", float(res.statistic), len(counts) - 1, float(res.pvalue)
    # fixed-point counts, with sparse upper cells pooled into one
    fix = values["fix"]
    total = len(fix)
    probs = [float(uniform_fixed_point_law(n, k)) for k in range(n + 1)]
    top = 0
    while top + 1 <= n and total * math.fsum(probs[top + 1:]) >= 5:
        top += 1
    observed = [int(np.count_nonzero(fix == k)) for k in range(top)] + [int(np.count_nonzero(fix >= top))]
    expected = [total * p for p in probs[:top]] + [total * math.fsum(probs[top:])]
    res = stats.chisquare(observed, expected)
    return "fixed_points", float(res.statistic), len(observed) - 1, float(res.pvalue)


def cmd_broder(args) -> int:
    n = args.n[0]
    result = simulate_marking(n, args.replicas, args.seed, args.t_star, _threads(args))
    values = {"fix": result.records["z_fix"]}
    if "z_index" in result.records:
        values["index"] = result.records["z_index"]
    test, statistic, dof, pvalue = _chi_square(values, n)
    summary = {
        "n": n,
        "replicas": args.replicas,
        "seed": args.seed,
        "t_star": result.config["t_star"],
        "t_star_clamped": result.config["t_star_clamped"],
        "mean_untouched_at_t_star": result.mean("untouched_at_t_star"),
        "test": test,
        "chi_square": statistic,
        "degrees_of_freedom": dof,
        "p_value": pvalue,
        "p_threshold": BRODER_P_THRESHOLD,
        "coupling_failure_frequency": coupling_failure_frequency(result),
        "mean_kappa": result.mean("kappa"),
        "mean_tau_m": result.mean("tau_m"),
    }
    hists = {"kappa": result.histogram("kappa"), "tau_m": result.histogram("tau_m")}
    with _output(args.out) as fh:
        if args.format == "json":
            doc = {"summary": {k: _jsonable(v) for k, v in summary.items()},
                   "histograms": {k: {str(v): c for v, c in h.items()} for k, h in hists.items()}}
            fh.write(json.dumps(doc, separators=(",", ":")) + "\n")
        else:
            fh.write("section,key,value\n")
            for k, v in summary.items():
                fh.write(f"summary,{k},{_cell(v)}\n")
            for name, h in hists.items():
                for v, c in h.items():
                    fh.write(f"{name}_histogram,{v},{c}\n")
    if pvalue <= BRODER_P_THRESHOLD:
        print(f"uniformity test failed: p = {pvalue!r} <= {BRODER_P_THRESHOLD}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_giant(args) -> int:
    from .graph import restricted_fixed_point_law, simulate_giant, trace_giant

    columns = [
        "n", "t_prime", "t", "replicas", "seed", "failure_frequency", "mean_largest_component",
        "mean_untouched", "restricted_fixed_stat_tv", "restricted_fixed_stat_tv_half_width",
    ]
    threads = _threads(args)
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError(f"n must be at least 2, got {n}")
        for time in _times(args, n):
            result = simulate_giant(n, time.t, args.replicas, args.seed, threads)
            stat = tv_lower_bound_via_statistic(result.restricted_fixed, reference_law=restricted_fixed_point_law(result))
            rows.append({
                "n": n,
                "t_prime": time.t_prime,
                "t": time.t,
                "replicas": args.replicas,
                "seed": args.seed,
                "failure_frequency": result.failure_frequency,
                "mean_largest_component": float(np.mean(result.largest)),
                "mean_untouched": float(np.mean(result.untouched)),
                "restricted_fixed_stat_tv": stat.value,
                "restricted_fixed_stat_tv_half_width": stat.half_width,
            })
    with _output(args.out) as fh:
        _write_table(fh, columns, rows, args.format)
    if args.trace:
        n = args.n[0]
        t = _times(args, n)[0].t
        with _output(args.trace) as fh:
            trace_giant(n, t, args.seed).write_csv(fh)
    return EXIT_OK


def cmd_validate(args) -> int:
    n_max = args.n[0] if args.n else 6
    report = run_validation(n_max)
    with _output(args.out) as fh:
        if args.format == "json":
            for c in report.checks:
                fh.write(json.dumps({"check": c.name, "passed": c.passed, "detail": c.detail}, separators=(",", ":")) + "\n")
        else:
            fh.write("check,passed,detail\n")
            for c in report.checks:
                detail = c.detail.replace('"', '""')
                fh.write(f'{c.name},{int(c.passed)},"{detail}"\n')
    failure = report.first_failure()
    if failure is not None:
        print(f"FAIL {failure.name}: {failure.detail}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# --- parser -----------------------------------------------------------------

_TIME_HELP = (
    "offset t' from the cutoff centre in steps: t = floor(n ln n / 2) + t' (natural log)"
)


def _add_common(p, *, multi_n: bool = True, n_required: bool = True):
    p.add_argument("--n", type=_positive, nargs="+" if multi_n else 1, required=n_required,
                   help="number of cards" + (" (several values sweep n)" if multi_n else ""))
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="csv table with header, or JSON lines (default: csv)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def _add_time(p, required: bool = True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--t-prime", type=int, nargs="+", help=_TIME_HELP)
    g.add_argument("--t", type=_non_negative, nargs="+", help="absolute step counts instead of --t-prime")


def _add_sim(p):
    p.add_argument("--replicas", type=_positive, required=True, help="number of independent replicas")
    p.add_argument("--seed", type=_non_negative, required=True,
                   help="base seed; replica r uses random stream (seed, r)")
    p.add_argument("--threads", type=_positive, default=None,
                   help=f"worker threads; results do not depend on it (default: ${THREADS_ENV} or all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rtwalk",
        description="Exact and Monte-Carlo experiments on the random transposition shuffle. "
        "Times use t = floor(n ln n / 2) + t' with natural logarithms; cards are labelled 0..n-1.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact-tv", help="exact TV of X_t to the Poisson reference law and to uniform",
                       description="Exact TV distances of X_t, through the cycle-type chain (n <= 60). "
                       "Columns: n, t_prime, t (steps), tv_nu, tv_uniform, poisson_profile_prediction = "
                       "TV(Pois(1 + exp(-2t'/n)), Pois(1)).")
    _add_common(p)
    _add_time(p)
    p.add_argument("--cap", type=_non_negative, default=None,
                   help="Poisson truncation of the reference law (default: min(floor((ln n)^2), n))")
    p.set_defaults(func=cmd_exact_tv)

    p = sub.add_parser("l2-bound", help="Plancherel upper bound on TV and the spectral tail sum",
                       description="Columns: n, t_prime, t (steps), plancherel_tv_bound, tail_sum over "
                       "lambda_1 < n - (ln n)^2, theory_window = n(ln ln n/4 - ln ln ln n) (reported only), "
                       "in_theory_window, and exact_tv_mu with --with-exact.")
    _add_common(p)
    _add_time(p)
    p.add_argument("--cap", type=_non_negative, default=None,
                   help="Poisson truncation of the mixture, at most n/3 (default: min(floor((ln n)^2), floor(n/3)))")
    p.add_argument("--with-exact", action="store_true", help="add the exact TV to the mixture (n <= 60)")
    p.set_defaults(func=cmd_l2_bound)

    p = sub.add_parser("simulate-tau", help="Monte-Carlo law of the walk at the all-touched time",
                       description="Simulates tau, the first step at which every card was picked. "
                       "stat_tv_* are plug-in TV distances between the fixed-point count of X_tau (or X_{tau-1}) "
                       "and that of a uniform permutation, with 95%% bootstrap half-widths.")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--records", default=None, help="write one JSON line per replica to this file")
    p.set_defaults(func=cmd_simulate_tau)

    p = sub.add_parser("broder", help="marking-scheme uniformity test and coupling statistics",
                       description="Runs the walk to t_star, then the coupled marking processes. "
                       "Tests Z at its all-marked time for uniformity (chi-square over all n! permutations "
                       "when n <= 8, else over fixed-point counts). Exit code 2 when p <= 1e-3.")
    _add_common(p, multi_n=False)
    _add_sim(p)
    p.add_argument("--t-star", type=_non_negative, default=None,
                   help="start of marking in steps (default: floor(n ln n/2) - n ln ln n/4 + 2n ln ln ln n, clamped at 0)")
    p.set_defaults(func=cmd_broder)

    p = sub.add_parser("giant", help="largest-component event of the graph process",
                       description="Columns: failure_frequency of the event 'largest component equals the touched "
                       "set and at most (ln n)^2 cards untouched', mean component size and untouched count, "
                       "and the plug-in TV of fixed points of X_t restricted to the largest component.")
    _add_common(p)
    _add_time(p)
    _add_sim(p)
    p.add_argument("--trace", default=None, help="write a per-step CSV for replica 0 of the first n and time")
    p.set_defaults(func=cmd_giant)

    p = sub.add_parser("validate", help="cross-check independent computations",
                       description="Runs every cross-oracle identity up to n_max = --n (default 6). "
                       "Exit code 2 and the first failure on stderr when any check fails.")
    _add_common(p, multi_n=False, n_required=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, TooLargeError, ValidityRangeError, ValueError) as exc:
        print(f"rtwalk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
