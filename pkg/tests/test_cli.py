import csv
import json

import numpy as np
import pytest

from hitchinflow.cli import main


def _run(args):
    return main(args)


def test_verify_exits_zero(capsys):
    assert _run(["--verify"]) == 0
    out = capsys.readouterr().out
    assert "identities hold" in out
    assert "FAIL" not in out


def test_flat_abelian_constant(tmp_path, capsys):
    code = _run(
        ["--scenario", "flat-abelian", "--t-end", "0.1", "--output", str(tmp_path)]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["stop_reason"] == "completed"
    assert report["max_cocal_residual"] == 0.0
    assert report["max_torsion_residual"] < 1e-12
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    xs = np.array([[float(r[k]) for k in r if k.startswith("x_")] for r in rows])
    assert np.max(np.abs(xs - xs[0])) == 0.0


def test_n11_squared_runs(tmp_path):
    code = _run(
        [
            "--scenario",
            "n11-spin7",
            "--t-end",
            "0.1",
            "--integrator",
            "rk45",
            "--output",
            str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["smoothness"]["c"] == pytest.approx(1.0)
    assert report["smoothness"]["ok"] is True
    assert report["classification_first"] == "SU3"
    assert report["classification_last"] == "SU3"
    with open(tmp_path / "trajectory.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header[:2] == ["t", "f"]
    assert "w_e12" in header and "s_e134" in header
    assert header[-3:] == ["cocal_residual", "normalization_residual", "torsion_residual"]


def test_n11_unsquared_refused(tmp_path, capsys):
    code = _run(
        ["--scenario", "n11-spin7", "--set", "bundle=unsquared", "--output", str(tmp_path)]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "c = -2" in err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["stop_reason"] == "refused_startup"
    assert report["smoothness"]["c"] == pytest.approx(-2.0)


def test_config_strict_mode(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "n11-spin7", "params": {"zeta": 1}}))
    assert _run(["--config", str(cfg)]) == 2
    assert "unknown parameter 'zeta'" in capsys.readouterr().err
    cfg.write_text(json.dumps({"scenario": "n11-spin7", "mystery": True}))
    assert _run(["--config", str(cfg)]) == 2
    cfg.write_text("{not json")
    assert _run(["--config", str(cfg)]) == 2


def test_set_overrides_and_bad_key(capsys):
    assert _run(["--scenario", "n11-spin7", "--set", "nope=3"]) == 2
    assert "unknown parameter" in capsys.readouterr().err


def test_sweep_writes_index_and_theta_invariance(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "scenario": "n11-spin7",
                "params": {"theta": [0.0, 0.5]},
                "flow": {
                    "t_end": 0.05,
                    "integrator": "rk4-fixed",
                    "step": 0.001,
                    "sample_dt": 0.01,
                },
                "output": str(tmp_path / "out"),
            }
        )
    )
    assert _run(["--config", str(cfg)]) == 0
    index = json.loads((tmp_path / "out" / "index.json").read_text())
    assert {x["label"] for x in index} == {"theta=0.0", "theta=0.5"}
    assert all(x["stop_reason"] == "completed" for x in index)

    def fseries(label):
        with open(tmp_path / "out" / label / "trajectory.csv") as fh:
            return [float(r["f"]) for r in csv.DictReader(fh)]

    f0, f1 = fseries("theta=0.0"), fseries("theta=0.5")
    assert max(abs(a - b) for a, b in zip(f0, f1)) < 1e-6


def test_fixed_step_csv_deterministic(tmp_path):
    args = [
        "--scenario",
        "n11-spin7",
        "--t-end",
        "0.03",
        "--integrator",
        "rk4",
        "--output",
    ]
    assert _run(args + [str(tmp_path / "a")]) == 0
    assert _run(args + [str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert a == b


def test_report_only_skips_csv(tmp_path):
    code = _run(
        [
            "--scenario",
            "n11-spin7",
            "--t-end",
            "0.03",
            "--report-only",
            "--output",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert (tmp_path / "report.json").exists()
    assert not (tmp_path / "trajectory.csv").exists()


def test_verify_flag_with_scenario(tmp_path):
    code = _run(
        [
            "--scenario",
            "flat-abelian",
            "--t-end",
            "0.02",
            "--verify",
            "--output",
            str(tmp_path),
        ]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["identity_suite"]["passed"] == report["identity_suite"]["total"]
