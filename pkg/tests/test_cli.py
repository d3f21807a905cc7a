import json
import math
import subprocess
import sys

import numpy as np
import pytest

from grovercavity.cli import Config, ConfigError, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_plan_examples(capsys):
    code, out, _ = run(capsys, "plan", "--n", "100", "--dicke", "50")
    assert code == 0 and json.loads(out)["k"] == 3
    code, out, _ = run(capsys, "plan", "--n", "20", "--dicke", "1")
    assert json.loads(out)["k"] == 1


def test_plan_ghz_odd_rejected(capsys):
    code, _, err = run(capsys, "plan", "--n", "7", "--ghz")
    assert code == 2
    assert "GHZ requires even N" in err


def test_plan_infeasible_k(capsys):
    code, _, err = run(capsys, "plan", "--n", "100", "--dicke", "50", "--k", "1")
    assert code == 2 and err.startswith("error:")


def test_plan_bad_dicke_index(capsys):
    assert run(capsys, "plan", "--n", "4", "--dicke", "9")[0] == 2


def test_contour_small(capsys):
    code, out, err = run(capsys, "contour", "--n-max", "3")
    assert code == 0
    assert out.splitlines() == ["N,m,k", "3,0,0", "3,1,1", "3,2,1", "3,3,0"]
    assert err.strip() == "max_k=1"


def test_contour_file_and_row_count(tmp_path, capsys):
    path = tmp_path / "c.csv"
    code, out, _ = run(capsys, "contour", "--n-max", "500", "--out", str(path))
    assert code == 0 and out.strip() == "max_k=4"
    lines = path.read_text().splitlines()
    assert len(lines) - 1 == sum(n + 1 for n in range(3, 501))


def test_ideal_run_with_trajectory(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    code, out, _ = run(capsys, "run", "--n", "100", "--dicke", "50", "--trajectory", str(traj))
    doc = json.loads(out)
    assert code == 0 and doc["mode"] == "ideal"
    assert doc["ideal"]["fidelity"] == pytest.approx(1.0, abs=1e-9)
    rows = traj.read_text().splitlines()
    assert rows[0] == "step,amplitude" and len(rows) - 1 == 4


def test_noisy_run_fixed_delta(capsys):
    code, out, _ = run(
        capsys, "run", "--n", "12", "--dicke", "1", "--g", "10", "--kappa", "1",
        "--gamma", "1", "--delta", "31.6", "--sigma", "0.1",
    )
    doc = json.loads(out)
    assert code == 0 and doc["mode"] == "noisy"
    u, h = doc["unheralded"], doc["heralded"]
    assert h["fidelity"] >= u["fidelity"]
    assert u["delta_used"] == 31.6


def test_fig4_run_optimized(capsys):
    code, out, _ = run(
        capsys, "run", "--n", "20", "--dicke", "1", "--g", "10", "--kappa", "1",
        "--gamma", "1", "--sigma", "0.1",
    )
    doc = json.loads(out)
    assert code == 0
    assert 0.60 <= doc["unheralded"]["fidelity"] <= 0.90
    assert 0.70 <= doc["heralded"]["fidelity"] <= 1.00
    assert 0.65 <= doc["heralded"]["success_prob"] <= 0.95


def test_noisy_run_requires_sigma(capsys):
    code, _, err = run(capsys, "run", "--n", "5", "--dicke", "1", "--g", "10", "--kappa", "1", "--gamma", "1")
    assert code == 2 and "sigma" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 30, "dicke": 15}))
    code, out, _ = run(capsys, "plan", "--config", str(cfg))
    assert json.loads(out)["n_qubits"] == 30
    code, out, _ = run(capsys, "plan", "--config", str(cfg), "--n", "40")
    assert json.loads(out)["n_qubits"] == 40


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 30, "dicke": 15, "colour": "red"}))
    code, _, err = run(capsys, "plan", "--config", str(cfg))
    assert code == 2 and "colour" in err
    with pytest.raises(ConfigError):
        Config.from_mapping({"bogus": 1})


def test_missing_config_file_is_io_error(tmp_path, capsys):
    assert run(capsys, "plan", "--config", str(tmp_path / "nope.json"))[0] == 1


def test_unwritable_output_is_io_error(tmp_path, capsys):
    assert run(capsys, "contour", "--n-max", "3", "--out", str(tmp_path / "no" / "x.csv"))[0] == 1


def test_sigma_sweep_slope(capsys):
    code, out, err = run(
        capsys, "sweep", "--axis", "sigma", "--n", "15", "--dicke", "1",
        "--values", "0.001,0.00316,0.01,0.0316,0.1", "--jobs", "1",
    )
    assert code == 0
    assert len(out.splitlines()) == 6
    slope = float(err.split()[0].split("=")[1])
    assert slope == pytest.approx(2.0, abs=0.1)


def test_coop_sweep_unheralded_slope(tmp_path, capsys):
    path = tmp_path / "c.csv"
    code, out, _ = run(
        capsys, "sweep", "--axis", "C", "--n", "15", "--dicke", "1", "--sigma", "0.01",
        "--values", "100,10000,1000000", "--jobs", "1", "--out", str(path),
    )
    assert code == 0 and out.startswith("slope=")
    slope = float(out.split()[0].split("=")[1])
    assert slope == pytest.approx(-0.5, abs=0.1)
    assert len(path.read_text().splitlines()) == 4


def test_sweep_rejects_unordered_axis(capsys):
    code, _, _ = run(
        capsys, "sweep", "--axis", "sigma", "--n", "5", "--values", "0.1,0.01", "--jobs", "1"
    )
    assert code == 2


def test_qfunc_dimensions_and_ghz_poles(capsys):
    code, out, _ = run(capsys, "qfunc", "--n", "100", "--state", "ghz", "--n-beta", "91", "--n-phi", "12")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "beta,phi_az,q" and len(lines) == 1 + 91 * 12
    data = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    q = data[:, 2].reshape(91, 12)
    assert q[0].max() == pytest.approx(1.0) and q[-1].max() == pytest.approx(1.0)
    assert q[45].max() < 1e-10


def test_qfunc_dicke_ground_peak(capsys):
    _, out, _ = run(capsys, "qfunc", "--n", "10", "--state", "dicke:0", "--n-beta", "7", "--n-phi", "4")
    rows = [l.split(",") for l in out.splitlines()[1:]]
    top = max(rows, key=lambda r: float(r[2]))
    assert float(top[0]) == 0.0


@pytest.mark.parametrize("state", ["css:0.7", "rotated-dicke:3:1.0"])
def test_qfunc_state_specs(capsys, state):
    assert run(capsys, "qfunc", "--n", "8", "--state", state, "--n-beta", "5", "--n-phi", "6")[0] == 0


@pytest.mark.parametrize("state", ["ghz", "nonsense", "dicke:x", "css"])
def test_qfunc_bad_specs(capsys, state):
    assert run(capsys, "qfunc", "--n", "7", "--state", state)[0] == 2


def test_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run(capsys, "sweep", "--axis", "sigma", "--n", "9", "--values", "0.01,0.1", "--jobs", "1", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        run(capsys, "qfunc", "--n", "9", "--state", "dicke:4", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "grovercavity.cli", "plan", "--n", "10", "--dicke", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["k"] == 1
