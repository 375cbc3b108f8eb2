import csv
import io
import json
import subprocess
import sys

import pytest

from rtwalk import cli
from rtwalk.measures import cutoff_time


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exact_tv_table(capsys):
    code, out, _ = run(capsys, "exact-tv", "--n", "10", "40", "--t-prime", "-5", "0", "5")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["n", "t_prime", "t", "tv_nu", "tv_uniform", "poisson_profile_prediction"]
    assert len(table) == 6
    at_zero = next(r for r in table if r["n"] == "40" and r["t_prime"] == "0")
    assert int(at_zero["t"]) == cutoff_time(40)
    assert float(at_zero["tv_nu"]) == pytest.approx(0.0316763422680703, rel=1e-12)
    assert float(at_zero["poisson_profile_prediction"]) == pytest.approx(0.32975303263304656, rel=1e-12)


def test_exact_tv_absolute_times_and_json(capsys):
    code, out, _ = run(capsys, "exact-tv", "--n", "8", "--t", "0", "12", "--format", "json")
    assert code == 0
    recs = [json.loads(x) for x in out.splitlines()]
    assert [r["t"] for r in recs] == [0, 12]
    assert recs[0]["tv_uniform"] == pytest.approx(1 - 1 / 40320)


def test_exact_tv_too_large(capsys):
    code, _, err = run(capsys, "exact-tv", "--n", "61", "--t-prime", "0")
    assert code == 1
    assert "simulate-tau" in err


def test_l2_bound_dominates_exact(capsys):
    code, out, _ = run(capsys, "l2-bound", "--n", "12", "20", "--t-prime", "0", "10", "--with-exact")
    assert code == 0
    table = rows(out)
    assert "theory_window" in table[0] and "in_theory_window" in table[0]
    for r in table:
        assert float(r["plancherel_tv_bound"]) >= float(r["exact_tv_mu"])
    n20 = next(r for r in table if r["n"] == "20" and r["t_prime"] == "0")
    assert float(n20["plancherel_tv_bound"]) == pytest.approx(0.2110758168802208, rel=1e-12)


def test_l2_bound_bad_cap(capsys):
    code, _, err = run(capsys, "l2-bound", "--n", "12", "--t-prime", "0", "--cap", "5")
    assert code == 1 and "error" in err


def test_simulate_tau_is_reproducible(capsys, tmp_path):
    rec = tmp_path / "records.jsonl"
    args = ("simulate-tau", "--n", "20", "--replicas", "2000", "--seed", "3")
    code, first, _ = run(capsys, *args, "--records", str(rec))
    assert code == 0
    _, second, _ = run(capsys, *args, "--threads", "1")
    assert first == second
    table = rows(first)
    assert len(table) == 1 and int(table[0]["min_fix_prev"]) >= 1
    lines = rec.read_text().splitlines()
    assert len(lines) == 2000
    assert {"tau", "fix_tau", "fix_prev"} <= set(json.loads(lines[0]))


def test_small_sample_warning(capsys):
    code, _, err = run(capsys, "simulate-tau", "--n", "10", "--replicas", "100", "--seed", "0")
    assert code == 0 and "warning" in err


def test_broder_passes_and_fails(capsys, monkeypatch):
    args = ("broder", "--n", "4", "--replicas", "50000", "--seed", "2")
    code, out, _ = run(capsys, *args)
    assert code == 0
    summary = {r["key"]: r["value"] for r in rows(out) if r["section"] == "summary"}
    assert summary["test"] == "permutation" and summary["degrees_of_freedom"] == "23"
    assert summary["t_star_clamped"] in ("True", "true", "1")
    monkeypatch.setattr(cli, "BRODER_P_THRESHOLD", 1.0)
    code, _, err = run(capsys, *args)
    assert code == 2 and "uniformity" in err


def test_broder_json_large_n(capsys):
    code, out, _ = run(capsys, "broder", "--n", "20", "--replicas", "20000", "--seed", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["test"] == "fixed_points"
    assert set(doc["histograms"]) == {"kappa", "tau_m"}


def test_giant_with_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "giant", "--n", "50", "--t-prime", "0", "--replicas", "1000", "--seed", "1",
                       "--trace", str(trace))
    assert code == 0
    assert 0 <= float(rows(out)[0]["failure_frequency"]) <= 1
    assert len(trace.read_text().splitlines()) == cutoff_time(50) + 2


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--n", "5")
    assert code == 0
    assert out.splitlines()[0] == "check,passed,detail"
    assert all(r["passed"] == "1" for r in rows(out))


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["exact-tv", "--n", "10"],
        ["exact-tv", "--n", "10", "--t", "1", "--t-prime", "0"],
        ["exact-tv", "--n", "0", "--t", "1"],
        ["simulate-tau", "--n", "10", "--seed", "1"],
        ["broder", "--n", "4", "5", "--replicas", "10", "--seed", "1"],
        ["simulate-tau", "--n", "10", "--replicas", "10", "--seed", "-1"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 1


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    code, _, err = run(capsys, "simulate-tau", "--n", "10", "--replicas", "10", "--seed", "1")
    assert code == 1 and cli.THREADS_ENV in err


def test_help_mentions_natural_log(capsys):
    with pytest.raises(SystemExit):
        cli.main(["exact-tv", "--help"])
    assert "natural log" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rtwalk.cli", "exact-tv", "--n", "6", "--t", "3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("n,t_prime,t,")
