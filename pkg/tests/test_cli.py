import subprocess
import sys

import pytest

from nsvacuum.cli import main
from nsvacuum.harness import read_trajectory


def _ini(tmp_path, extra=""):
    p = tmp_path / "run.ini"
    p.write_text("[grid]\nN = 128\n[run]\nt_end = 0.01\n[picard]\nt_end = 0.005\nK = 3\n" + extra)
    return str(p)


def test_check_passes(capsys):
    assert main(["check", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_sweep_needs_three_points(tmp_path, capsys):
    assert main(["sweep", "--epsilons", "1e-2,5e-3", "--out", str(tmp_path)]) == 1
    assert "need ≥3 points" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["bogus"]) == 1
    assert main(["simulate", "--config", "/nonexistent.ini"]) == 1
    assert main(["simulate", "--threads", "0"]) == 1


def test_simulate_blowup_exit2(tmp_path, capsys):
    cfg = tmp_path / "blow.ini"
    cfg.write_text("[grid]\nN = 128\n[run]\nt_end = 1.0\n[initial]\nu_amp = 50\n")
    cfg = str(cfg)
    code = main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "at t=" in capsys.readouterr().err
    tr = read_trajectory(tmp_path / "o" / "trajectory.ndjson")
    assert tr.failed and tr.failure_time > 0 and len(tr.states) >= 1


def test_simulate_ok(tmp_path, capsys):
    assert main(["simulate", "--config", _ini(tmp_path), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "steps.csv").exists()
    assert "vacuum" in capsys.readouterr().out


def test_picard_and_eta(tmp_path, capsys):
    cfg = _ini(tmp_path)
    assert main(["picard", "--config", cfg, "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "picard.csv").exists()
    assert main(["picard", "--config", cfg, "--K", "1"]) == 1
    assert main(["eta-study", "--config", cfg, "--out", str(tmp_path / "e"), "--etas", "1e-1,1e-2,1e-3"]) == 0
    assert "monotone decrease: True" in capsys.readouterr().out
    assert main(["eta-study", "--config", cfg, "--etas", "1e-1,1e-2"]) == 1


def test_sweep_byte_identical(tmp_path):
    cfg = _ini(tmp_path)
    for d in ("a", "b"):
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / d), "--seed", "5",
                     "--epsilons", "1e-2,5e-3,2.5e-3"]) == 0
    for name in ("sweep.csv", "fit.csv", "rate_compare.csv", "apriori.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nsvacuum", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
