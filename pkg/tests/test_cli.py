"""End-to-end runs of ``python3 -m fraxterp``."""

import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from oracles import halfline_mp_oracle

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EX1 = str(CONFIGS / "example1.yaml")
HALF = str(CONFIGS / "halfline.yaml")


def run(*args):
    return subprocess.run([sys.executable, "-m", "fraxterp", *args],
                          capture_output=True, text=True, timeout=300)


def test_validate():
    r = run("validate", EX1)
    assert r.returncode == 0
    assert r.stdout.strip() == "(P1)/(P2) satisfied, contraction 0.8"


def test_evaluate():
    r = run("evaluate", EX1, "--x", "0.25", "--tol", "1e-10")
    assert r.returncode == 0 and r.stdout.strip() == "0.6500000000 ± 1e-10"
    r = run("evaluate", HALF, "--x", "inf")
    assert r.returncode == 0 and r.stdout.startswith("0.0000000000")


def test_evaluate_defaults_to_rounding_free_orbit():
    # the float orbit is off by 1.6e-9 here; the printed bound must still hold
    ref = halfline_mp_oracle(3.259905226940996)
    r = run("evaluate", HALF, "--x", "3.259905226940996", "--tol", "1e-10")
    # 10 printed decimals add up to 5e-11 of rounding
    assert abs(float(r.stdout.split()[0]) - ref) <= 1e-10 + 5e-11
    r = run("evaluate", HALF, "--x", "3.259905226940996", "--tol", "1e-10", "--float")
    assert abs(float(r.stdout.split()[0]) - ref) > 1e-9


def test_evaluate_outside_domain_is_usage_error():
    r = run("evaluate", EX1, "--x", "2")
    assert r.returncode == 2 and "error" in r.stderr


def test_lpcheck():
    r = run("lpcheck", EX1, "--p", "1")
    assert r.returncode == 1 and "criterion 2.8" in r.stdout
    r = run("lpcheck", EX1, "--p", "inf")
    assert r.returncode == 0 and "criterion 0.8" in r.stdout
    r = run("lpcheck", HALF, "--p", "1")
    assert r.returncode == 1 and "Jacobian hypothesis violated" in r.stdout


def test_sample_csv_and_svg(tmp_path):
    out, svg = tmp_path / "h.csv", tmp_path / "h.svg"
    r = run("sample", HALF, "--out", str(out), "--svg", str(svg), "--points", "65")
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,f" and len(lines) == 66
    assert lines[1] == "0,0" and lines[-1] == "inf,0"
    assert svg.read_text().lstrip().startswith("<?xml")


def test_sample_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sample", EX1, "--out", str(a), "--points", "129").returncode == 0
    assert run("sample", EX1, "--out", str(b), "--points", "129").returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_basis(tmp_path):
    out = tmp_path / "b.csv"
    r = run("basis", EX1, "--orders", "2,2", "--nodes", "0,0.5;0.5,1", "--out", str(out),
            "--points", "5")
    assert r.returncode == 0 and "dimension 4" in r.stdout
    assert out.read_text().splitlines()[0] == "x,L1_1,L1_2,L2_1,L2_2"


def test_tensor_sample(tmp_path):
    out = tmp_path / "t.csv"
    r = run("tensor-sample", EX1, HALF, "--out", str(out), "--points", "5")
    assert r.returncode == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert data.dtype.names == ("x", "xt", "f") and data.size == 25


def test_attractor(tmp_path):
    out = tmp_path / "a.pgm"
    r = run("attractor", EX1, "--window", "0", "1", "-1.5", "1.5", "--res", "64", "48",
            "--iters", "20", "--out", str(out))
    assert r.returncode == 0
    assert out.read_text().startswith("P2\n64 48\n1\n")


def test_verify():
    r = run("verify", EX1, "--res", "128")
    assert r.returncode == 0
    assert "FAIL" not in r.stdout and "graph invariance" in r.stdout


def test_figures_dump_config_round_trip(tmp_path):
    r = run("figures", "--outdir", str(tmp_path), "--dump-config", "--intervals", "256")
    assert r.returncode == 0
    for stem in ("fig1_left", "fig1_right", "fig2"):
        csv = tmp_path / f"{stem}.csv"
        again = tmp_path / f"{stem}.again.csv"
        assert (tmp_path / f"{stem}.svg").exists()
        assert run("validate", str(tmp_path / f"{stem}.yaml")).returncode == 0
        assert run("sample", str(tmp_path / f"{stem}.yaml"), "--out", str(again),
                   "--points", "257").returncode == 0
        assert again.read_bytes() == csv.read_bytes()


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text('name: x\npieces:\n  bounded:\n    - {interval: "[0, 1]", scal: 0.5}\n')
    r = run("validate", str(bad))
    assert r.returncode == 2
    assert "line 4" in r.stderr


def test_usage_errors():
    assert run().returncode == 2
    assert run("bogus").returncode == 2
    assert run("evaluate", EX1).returncode == 2
