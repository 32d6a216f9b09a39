import json
import subprocess
import sys

import pytest

from nffrecovery.cli import main


def _cfg(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_bounds_feasible(tmp_path, capsys):
    rc = main(["bounds", "--config", _cfg(tmp_path, {"n": 40, "dim": 20, "sparsity_d": 2}), "--seed", "3"])
    report = json.loads(capsys.readouterr().out)
    assert rc == 0 and report["feasible"] and report["m_k"] > 0


def test_bounds_identity_matches_limit(tmp_path):
    out = tmp_path / "b.json"
    rc = main(["bounds", "--config", _cfg(tmp_path, {"identity": True, "n": 1000, "sparsity_d": 10}),
               "--out", str(out)])
    report = json.loads(out.read_text())
    assert rc == 0
    assert report["m_k"] == pytest.approx(report["m_k_gaussian_limit"], rel=1e-12)


def test_bounds_infeasible_exit_code(tmp_path, capsys):
    rc = main(["bounds", "--config", _cfg(tmp_path, {"n": 20, "dim": 2, "sparsity_d": 10})])
    report = json.loads(capsys.readouterr().out)
    assert rc == 3 and report["m_k"] is None and not report["feasible"]


def test_parameter_errors_exit_2(tmp_path, capsys):
    assert main(["bounds", "--config", _cfg(tmp_path, {"delta": 2.0})]) == 2
    assert main(["bounds", "--config", _cfg(tmp_path, {"unknown_key": 1})]) == 2
    assert main(["mse-sweep", "--config", _cfg(tmp_path, {"trials": 0})]) == 2
    assert main(["bounds", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["recover"]) == 2
    # degenerate kernel
    assert main(["bounds", "--config", _cfg(tmp_path, {"n": 400, "dim": 1})]) == 2
    assert "error" in capsys.readouterr().err


def test_ratio_curve(tmp_path):
    out = tmp_path / "ratio.csv"
    rc = main(["ratio-curve", "--config", _cfg(tmp_path, {"dims": [2, 60], "sparsities": [1], "n": 100}),
               "--out", str(out), "--seed", "1"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "d,D,M_k,M_f,ratio,feasible" and len(lines) == 3
    assert (tmp_path / "ratio.csv.manifest.json").exists()
    rc = main(["ratio-curve", "--config", _cfg(tmp_path, {"dims": [2], "sparsities": [1], "n": 100}),
               "--out", str(out)])
    assert rc == 3


def test_make_trial_then_recover(tmp_path):
    trial = tmp_path / "trial.json"
    cfg = _cfg(tmp_path, {"n": 30, "dim": 10, "m": 15, "sparsity_d": 2, "sign_model": "steinhaus"})
    assert main(["make-trial", "--config", cfg, "--seed", "4", "--out", str(trial)]) == 0
    result = tmp_path / "result.json"
    assert main(["recover", "--trial", str(trial), "--out", str(result)]) == 0
    res = json.loads(result.read_text())
    for key in ("theta_hat", "iterations", "converged", "primal_residual", "dual_residual",
                "constraint_violation", "objective"):
        assert key in res
    assert res["converged"] and res["verdict"]["success"]


def test_mse_sweep_is_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, {"n": 40, "dim": 10, "m_values": [15], "d_sweep": [2, 3], "trials": 3})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["mse-sweep", "--config", cfg, "--seed", "9", "--out", str(a)]) == 0
    assert main(["mse-sweep", "--config", cfg, "--seed", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("M,D,mse,success_rate,successes,failures,nonconverged,trials\n")


@pytest.mark.parametrize("command,cfg", [
    ("verify-thm2", {"n": 30, "m": 500, "trials": 20}),
    ("verify-thm3", {"n": 30, "m": 500, "trials": 20}),
    ("verify-lemma3", {"m": 100, "trials": 200}),
])
def test_verifiers(tmp_path, capsys, command, cfg):
    assert main([command, "--config", _cfg(tmp_path, cfg)]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["bound_holds"] and 0 <= res["empirical_rate"] <= 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nffrecovery.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("bounds", "ratio-curve", "recover", "mse-sweep", "verify-thm2", "verify-thm3", "verify-lemma3"):
        assert name in proc.stdout
