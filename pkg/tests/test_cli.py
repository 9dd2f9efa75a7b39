import json
import os
import subprocess
import sys

import pytest

from pmns.cli import main

SMALL = """
[grid]
n = 8
delta_xi = 1.0
[time]
t_min = 1e-2
t_max = 1
per_decade = 3
[solver]
epsilon_fraction = 0.5
tol = 1e-10
[data]
kind = random
pm2 = 0.03
seed = 1
[force]
kind = dirac
amplitude = 0.1, 0, 0
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bofc_and_cofb(capsys):
    code, out, _ = _run(["bofc", "--c", "2"], capsys)
    data = json.loads(out)
    assert code == 0 and data["rel_diff"] < 1e-10
    code, out, _ = _run(["cofb", "--b", str(data["b_closed_form"])], capsys)
    assert code == 0 and json.loads(out)["c"] == pytest.approx(2.0, rel=1e-10)


def test_constants(capsys):
    code, out, _ = _run(["constants"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["kappa"] == pytest.approx(1.0)
    assert data["threshold_effective"] == pytest.approx(1 / (4 * data["eta_effective"]))
    assert data["riesz"]


def test_landau_verify(capsys):
    code, out, _ = _run(["landau-verify", "--c", "3", "--quad", "128"], capsys)
    assert code == 0 and json.loads(out)["c"] == 3.0


def test_solve_outputs_and_determinism(small_cfg, tmp_path, capsys, monkeypatch):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert _run(["solve", "--config", str(small_cfg), "--out", str(out1)], capsys)[0] == 0
    monkeypatch.setenv("PMNS_THREADS", "4")
    assert _run(["solve", "--config", str(small_cfg), "--out", str(out2)], capsys)[0] == 0
    (run_dir,) = list(out1.iterdir())
    names = sorted(p.name for p in run_dir.iterdir())
    assert {"report.json", "manifest.json", "pm2.csv", "field_0000.pmns"} <= set(names)
    assert (run_dir / "report.json").read_bytes() == (out2 / run_dir.name / "report.json").read_bytes()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["outputs"] == names and manifest["input_hashes"]["config"]


def test_stationary_and_regularize(small_cfg, tmp_path, capsys):
    assert _run(["stationary", "--config", str(small_cfg), "--out", str(tmp_path)], capsys)[0] == 0
    code, _, err = _run(["regularize", "--config", str(small_cfg), "--a", "2.5", "--out", str(tmp_path)], capsys)
    assert code == 2 and "not admissible" in err
    cfg = tmp_path / "nf.cfg"
    cfg.write_text(SMALL.split("[force]")[0])
    code, out, _ = _run(["regularize", "--config", str(cfg), "--a", "2.5", "--q", "4", "--out", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["bounded"]


def test_stability_sample_config(tmp_path, capsys):
    cfg = os.path.join(os.path.dirname(__file__), "..", "configs", "stability.cfg")
    code, out, _ = _run(["stability", "--config", cfg, "--out", str(tmp_path)], capsys)
    data = json.loads(out)
    assert code == 0 and data["decayed"]
    (run_dir,) = list(tmp_path.iterdir())
    assert {"diff_pm2.csv", "linear_part.csv"} <= {p.name for p in run_dir.iterdir()}


def test_scan(capsys):
    code, out, _ = _run(["scan", "--c", "2", "--eps", "0,0.01", "--n", "8"], capsys)
    data = json.loads(out)
    assert code == 0 and [r["converged"] for r in data["records"]] == [True, True]


@pytest.mark.parametrize(
    "argv,code",
    [
        ([], 64),
        (["frobnicate"], 64),
        (["bofc"], 2),
        (["bofc", "--c", "0.5"], 2),
        (["bofc", "--c", "two"], 2),
        (["solve", "--config", "/nonexistent.cfg"], 2),
        (["scan", "--c", "2", "--eps", "0.2,0.1"], 2),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert _run(argv, capsys)[0] == code


def test_non_convergence_exit(tmp_path, capsys):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text(SMALL.replace("tol = 1e-10", "tol = 1e-30\nmax_iter = 3"))
    code, _, err = _run(["solve", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 3 and "final_residual" in err


def test_unwritable_output(small_cfg, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert _run(["solve", "--config", str(small_cfg), "--out", str(blocker)], capsys)[0] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pmns", "bofc", "--c", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "b_closed_form" in proc.stdout
