import csv
import io
import json
import subprocess
import sys

import pytest

from pencilstab.cli import EXIT_ARGS, EXIT_ASSUMPTION, main, read_config


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_profile_boussinesq_peak(capsys):
    code, out, _ = run(["profile", "--model", "boussinesq", "--c", "0.3", "--p", "2"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert max(float(r["phi"]) for r in rows) == pytest.approx(1.365, abs=1e-12)


def test_profile_kgz_files(tmp_path, capsys):
    code, _, _ = run(["profile", "--model", "kgz", "--c", "0", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "profile.csv")))
    assert set(rows[0]) == {"x", "phi", "psi"}
    centre = [r for r in rows if float(r["x"]) == 0.0][0]
    assert float(centre["phi"]) == 2.0
    meta = json.loads((tmp_path / "profile.json").read_text())
    assert meta["N"] == 384 and meta["residual"] < 1e-9


def test_profile_beam_too_fast(capsys):
    code, _, err = run(["profile", "--model", "beam", "--c", "2.0", "--p", "3"], capsys)
    assert code == EXIT_ARGS
    assert "error" in err


def test_index_kgz(capsys):
    code, out, _ = run(["index", "--model", "kgz", "--c", "0.5"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["stable"] is False
    assert abs(data["omega_star"] - 0.8660254) <= 1e-3
    assert data["assumptions"]["A"] and data["assumptions"]["B"]
    assert set(data) >= {"model", "c", "p", "grid", "assumptions", "q_index", "omega_star",
                         "stable", "lambda0", "residuals"}


def test_index_boussinesq_stable(capsys):
    code, out, _ = run(["index", "--model", "boussinesq", "--c", "0.6", "--p", "2"], capsys)
    assert code == 0 and json.loads(out)["stable"] is True


def test_index_supercritical(capsys):
    code, out, _ = run(["index", "--model", "boussinesq", "--c", "0.3", "--p", "5"], capsys)
    data = json.loads(out)
    assert data["stable"] is False and data["omega_star"] == "inf"


def test_index_deterministic(capsys):
    args = ["index", "--model", "boussinesq", "--c", "0.3", "--N", "256"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args, capsys)
    assert a == b


def test_index_assumption_failure(capsys):
    code, out, _ = run(["index", "--model", "boussinesq", "--c", "0.3", "--tol-zero-rel", "1e-6",
                        "--tol-gap-rel", "1e-4"], capsys)
    assert code == EXIT_ASSUMPTION
    assert json.loads(out)["assumptions"]["A"] is False


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# example\nmodel = kgz\nc = 0.6\nN = 256\n")
    assert read_config(cfg) == {"model": "kgz", "c": 0.6, "N": 256}
    code, out, _ = run(["index", "--config", str(cfg), "--c", "0.8"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["model"] == "kgz" and data["c"] == 0.8 and data["grid"]["N"] == 256
    assert data["stable"] is True


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(["index", "--config", str(cfg)], capsys)
    assert code == EXIT_ARGS and "unknown key" in err


def test_scan_and_gplot(tmp_path, capsys):
    out = tmp_path / "scan"
    code, _, _ = run(["scan", "--model", "boussinesq", "--p", "2", "--c-lo", "0.45", "--c-hi", "0.55",
                      "--dc", "0.05", "--out", str(out)], capsys)
    assert code == 0
    text = (out / "scan.csv").read_bytes()
    assert b"\r\n" not in text
    assert text.splitlines()[0] == b"c,q_index,omega_star,stable,lambda0,residual,flags"
    summary = json.loads((out / "scan.json").read_text())
    assert 0.49 <= summary["threshold"] <= 0.51

    code, _, _ = run(["index", "--model", "boussinesq", "--c", "0.3", "--N", "256", "--trace",
                      "--out", str(tmp_path / "idx")], capsys)
    assert code == 0
    plots = tmp_path / "plots"
    code, _, _ = run(["gplot", str(out / "scan.json"), str(tmp_path / "idx" / "index.json"),
                      "--out", str(plots)], capsys)
    assert code == 0
    scan_dat = (plots / "scan_scan.dat").read_text().splitlines()
    assert scan_dat[0].startswith("#") and len(scan_dat) == 4
    g_dat = (plots / "index_G.dat").read_text().splitlines()
    assert len(g_dat) > 40


def test_evolve_command(tmp_path, capsys):
    code, _, _ = run(["evolve", "--model", "kgz", "--c", "0.5", "--N", "256", "--t-end", "30",
                      "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "evolve.json").read_text())
    assert summary["relative_error"] < 0.05
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,norm\n")


def test_bad_flag_exit_code():
    proc = subprocess.run([sys.executable, "-m", "pencilstab.cli", "index", "--model", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
