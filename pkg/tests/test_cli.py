import json
import subprocess
import sys

import numpy as np
import pytest

from coxcopula import ClaytonCopula, SamplePairSet
from coxcopula.cli import main


def test_propagate_copula_value(capsys):
    assert main(["propagate", "--alpha", "0.6931471805599453", "--beta", "0", "--z", "1",
                 "--u", "0.25", "--v", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "u,v,cdf"
    assert float(lines[1].split(",")[2]) == pytest.approx(0.5 * ClaytonCopula(3).cdf(0.5, 0.5))


def test_propagate_pickands(capsys):
    assert main(["propagate", "--family", "gumbel", "--pickands", "--z", "0",
                 "--s", "0,0.5,1"]) == 0
    rows = [r.split(",") for r in capsys.readouterr().out.splitlines()[1:]]
    assert float(rows[0][1]) == 1.0 and float(rows[2][1]) == 1.0
    assert float(rows[1][1]) == pytest.approx(2 ** (-2 / 3))


def test_verify_exit_codes(capsys, tmp_path):
    assert main(["verify", "--family", "clayton", "--resolution", "16"]) == 0
    out = tmp_path / "v.json"
    assert main(["verify", "--family", "gumbel-barnett", "--theta", "0.5", "--resolution", "16",
                 "--out", str(out)]) == 1
    record = json.loads(out.read_text())
    assert {r["property"]: r["verdict"] for r in record}["tp2"] == "fail"


def test_sample_and_estimate(tmp_path, capsys):
    path = tmp_path / "u.csv"
    assert main(["sample", "--seed", "3", "--n", "2000", "--out", str(path)]) == 0
    pairs = SamplePairSet.from_csv(path)
    assert len(pairs) == 2000 and pairs.kind == "uniform"
    capsys.readouterr()
    assert main(["estimate", str(path), "--family", "clayton"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["theta"] == pytest.approx(3.0, abs=0.5)


def test_sample_is_reproducible(capsys):
    main(["sample", "--seed", "5", "--n", "10"])
    first = capsys.readouterr().out
    main(["sample", "--seed", "5", "--n", "10"])
    assert capsys.readouterr().out == first


def test_estimate_lifetimes_with_covariates(tmp_path, capsys):
    parts = []
    for z in ("0", "1"):
        p = tmp_path / f"z{z}.csv"
        main(["sample", "--seed", "7" + z, "--n", "400", "--lifetimes", "--alpha", "0.8",
              "--beta", "0.4", "--z", z, "--out", str(p)])
        parts.append(p.read_text().splitlines())
    merged = tmp_path / "all.csv"
    merged.write_text("\n".join(parts[0] + parts[1][1:]) + "\n")
    capsys.readouterr()
    assert main(["estimate", str(merged)]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["cox_x"]["coefficients"][0] == pytest.approx(0.8, abs=0.25)
    assert record["cox_y"]["coefficients"][0] == pytest.approx(0.4, abs=0.25)


def test_experiment_with_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "stability", "replications": 4,
                               "z_grid": [0.0, 0.3], "seed": 11}))
    out = tmp_path / "res"
    assert main(["experiment", "stability", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "stability_report.json").read_text())
    assert report["config"]["seed"] == 11 and report["replications"] == 4
    assert main(["experiment", "stability", "--config", str(cfg), "--out", str(out),
                 "--reps", "6", "--seed", "12", "--scheme", "mc"]) == 0
    report = json.loads((out / "stability_report.json").read_text())
    assert report["replications"] == 6 and report["config"]["scheme"] == "mc"


def test_experiment_config_mismatch(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "stability"}))
    assert main(["experiment", "case-study", "--config", str(cfg)]) == 2


def test_experiment_figures(tmp_path, capsys):
    assert main(["experiment", "figures", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "figure2_pickands.csv").exists()


def test_invalid_input_exit_code(capsys):
    assert main(["propagate", "--u", "1.5"]) == 2
    assert "error:" in capsys.readouterr().err


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "coxcopula.cli", "propagate", "--z", "0"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[0] == "u,v,cdf"
    assert float(out.stdout.splitlines()[1].split(",")[2]) == pytest.approx(15 ** (-1 / 3))
