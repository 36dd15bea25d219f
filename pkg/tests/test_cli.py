import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from pm4dof.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _value(text, key):
    for line in text.splitlines():
        if line.strip().startswith(key + " ="):
            return float(line.split("=")[1].split()[0])
    raise KeyError(key)


def test_ik_home(capsys):
    code, out, _ = run(capsys, "ik", "--x", "0", "--z", "0.635", "--theta", "0", "--psi", "0")
    assert code == 0
    assert "q42 = 0.635000" in out
    assert "q13 = 0.665751" in out


def test_ik_degenerate(capsys):
    code, _, err = run(capsys, "ik", "--x", "0", "--z", "0", "--theta", "0", "--psi", "0")
    assert code == 2
    assert "degenerate pose" in err


def test_ik_residual_report(capsys):
    code, out, _ = run(capsys, "ik", "--x", "0.05", "--z", "0.75")
    assert code == 0
    assert _value(out, "max |phi|") < 1e-10


def test_fk_round_trip_with_oracle(capsys):
    _, out, _ = run(capsys, "ik", "--x", "0", "--z", "0.635")
    lengths = [f"{_value(out, n):.6f}" for n in ("q13", "q23", "q33", "q42")]
    code, out, _ = run(capsys, "fk", *lengths, "--oracle")
    assert code == 0
    assert abs(_value(out, "x")) < 1e-5 and _value(out, "z") == pytest.approx(0.635, abs=1e-5)
    assert _value(out, "oracle agreement") < 1e-8
    assert _value(out, "iterations") >= 0


def test_fk_infeasible(capsys):
    code, _, err = run(capsys, "fk", "0.1", "0.1", "0.1", "0.1")
    assert code == 3
    assert "no convergence" in err


def test_fk_iteration_cap(capsys):
    code, _, err = run(capsys, "fk", "0.824926", "0.749702", "0.740066", "0.751665",
                       "--guess", "-0.1", "0.55", "20", "20", "--max-iter", "1")
    assert code == 3
    assert "no convergence" in err


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["fk", "1", "2"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--traj", "spiral", "--out", "x.csv"])
    assert info.value.code == 1


def test_simulate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[geometry]\nfoo = 1\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "o.csv"))
    assert code == 1
    assert "unknown key" in err
    code, _, _ = run(capsys, "simulate", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o.csv"))
    assert code == 1


def test_simulate_unreachable_reference(tmp_path, capsys):
    cfg = tmp_path / "far.cfg"
    cfg.write_text("[trajectory]\nx0 = 0\nz0 = 0\nduration = 1\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--traj", "hold", "--out", str(tmp_path / "o.csv"))
    assert code == 4
    assert "tick 0" in err


def test_simulate_hold_zero_error(tmp_path, capsys):
    out_csv = tmp_path / "hold.csv"
    code, out, _ = run(capsys, "simulate", "--traj", "hold", "--duration", "1", "--out", str(out_csv))
    assert code == 0
    for name in ("q13", "q23", "q33", "q42"):
        assert _value(out, name) == 0.0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 1000
    assert all(float(r["e13"]) == 0.0 for r in rows)


def test_simulate_summary_units(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--traj", "sinusoidal", "--duration", "10", "--out", str(tmp_path / "s.csv"))
    assert code == 0
    assert "mean signed error (m)" in out and "phase offset (ms)" in out
    errors = [float(l.split("=")[1]) for l in out.split("phase offset")[0].splitlines() if l.startswith("  q")]
    assert len(errors) == 4 and all(abs(e) < 1e-3 for e in errors)


def test_simulate_csv_byte_identical(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[trajectory]\nduration = 3\n[plant]\nencoder_resolution = 1e-6\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--config", str(cfg), "--traj", "elliptic", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--config", str(cfg), "--traj", "elliptic", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_default_grid(tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--out", str(out_csv))
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 225
    assert all(r["reachable"] == "1" for r in rows)
    cond = np.array([float(r["condition"]) for r in rows])
    assert np.all(np.isfinite(cond)) and np.all(cond > 0)
    assert "225 reachable" in out


def test_sweep_flags_origin(capsys):
    code, out, _ = run(capsys, "sweep", "--x", "-0.1", "0.1", "3", "--z", "0", "0.8", "3",
                       "--theta", "0", "0", "1", "--psi", "0", "0", "1")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    origin = [r for r in rows if float(r["x"]) == 0 and float(r["z"]) == 0]
    assert len(origin) == 1 and origin[0]["reachable"] == "0"
    assert math.isnan(float(origin[0]["condition"]))


def test_sweep_bad_grid(capsys):
    code, _, err = run(capsys, "sweep", "--x", "0", "1", "0")
    assert code == 1
    assert "grid" in err


def test_config_command_parses(capsys, tmp_path):
    code, out, _ = run(capsys, "config")
    assert code == 0
    path = tmp_path / "default.cfg"
    path.write_text(out)
    assert run(capsys, "ik", "--x", "0", "--z", "0.635", "--config", str(path))[0] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pm4dof", "ik", "--x", "0", "--z", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "degenerate pose" in proc.stderr
