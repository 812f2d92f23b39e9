import json
import subprocess
import sys

import pytest

from dkmonopole import cli, reports
from dkmonopole.reports import Check, Report, dumps


def run(*args, env=None):
    return subprocess.run([sys.executable, "-m", "dkmonopole.cli", *args], capture_output=True, text=True, env=env)


def test_dumps_precision():
    assert dumps({"x": 0.1}) == '{"x": 0.10000000000000001}\n'
    assert dumps([1, True, None, "a"]) == '[1, true, null, "a"]\n'
    assert json.loads(dumps({"a": [1.5, float("nan")]}))["a"][1] == "nan"


def test_check_directions():
    assert Check("a", 1e-9, 1e-8).passed
    assert not Check("a", 1e-7, 1e-8).passed
    assert Check("drift", 0.5, 1e-3, above=True).passed
    assert not Check("a", float("nan"), 1.0).passed
    rep = Report("x")
    rep.add("ok", 0, 1)
    rep.add("bad", 2, 1)
    assert rep.failing() == ["bad"] and not rep.passed


def test_verify_algebra_report(capsys):
    assert cli.main(["verify", "algebra"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["suite"] == "algebra"
    assert sum(c["name"].startswith("trilinear") for c in doc["checks"]) == 128
    assert all(c["pass"] for c in doc["checks"])
    assert list(doc) == ["suite", "checks", "seed", "config"]


def test_verify_parity(capsys):
    assert cli.main(["verify", "parity", "--kappa", "1", "--j", "2", "--epsilon", "1.3", "--mass", "1",
                     "--case", "b"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dimension"] == 0
    assert doc["killed"] == [5, 8, 2, 9]


def test_solve_minimal(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert cli.main(["solve", "minimal", "--kappa", "1", "--epsilon", "0.6", "--mass", "1", "-o", str(out)]) == 0
    assert "rate 0.8" in capsys.readouterr().err
    doc = json.loads(out.read_text())
    assert doc["rate"] == pytest.approx(0.8)
    assert max(c["residual"] for c in doc["checks"]) < 1e-10
    assert (tmp_path / "m.csv").exists()


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    assert cli.main(["show", "matrices", "--basis", "cartesian", "--format", "csv", "--which", "all"]) == 0
    lines = (tmp_path / "matrices.csv").read_text().splitlines()
    assert lines[0] == "label,basis,row,col,re,im"
    assert len(lines) == 1 + 12 * 100  # 4 beta, 6 j, P, U


def test_failing_suite_exit_code(monkeypatch, capsys):
    def broken(seed=0):
        rep = Report("algebra", seed=seed)
        rep.add("always_fails", 1.0, 0.5)
        return rep

    monkeypatch.setattr(reports, "algebra_suite", broken)
    assert cli.main(["verify", "algebra"]) == 1
    assert "always_fails" in capsys.readouterr().err


def test_usage_errors():
    assert run("verify", "nonsense").returncode == 2
    assert run("solve", "minimal", "--kappa", "1").returncode == 2
    assert run("--no-such-flag").returncode == 2
    assert run("solve", "radial", "--kappa", "1", "--epsilon", "1", "--mass", "1").returncode == 2
    # inadmissible quantum numbers are a usage error too
    assert run("verify", "parity", "--kappa", "1", "--j", "0.5").returncode == 2


def test_seed_reproducible():
    a = run("verify", "gauge", "--trials", "5", "--seed", "7")
    b = run("--seed", "7", "verify", "gauge", "--trials", "5")
    c = run("verify", "gauge", "--trials", "5", "--seed", "8")
    assert a.returncode == 0 and a.stdout == b.stdout
    assert a.stdout != c.stdout
