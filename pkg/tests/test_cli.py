import json
import math
import subprocess
import sys

import numpy as np
import pytest

from polyhencky.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_identity(capsys):
    code, out, _ = run(capsys, "eval", "hencky", "--mu", "1", "--lambda", "0", "1", "0", "0", "1")
    assert code == 0
    assert out.splitlines()[0] == "0"


def test_eval_extension_in_agreement_region(capsys):
    code, out, _ = run(capsys, "eval", "hencky-ext", "--mu", "1", "--lambda", "0", *"1.1 0 0 0 1 0 0 0 0.9".split())
    assert code == 0
    assert float(out.splitlines()[0]) == pytest.approx(0.0201848686340158, rel=1e-14)
    assert len(out.splitlines()) == 4  # value and three gradient rows


def test_eval_json_and_negative_entries(capsys):
    code, out, _ = run(capsys, "eval", "dist2", "--json", "0", "-1", "1", "0")
    assert code == 0
    data = json.loads(out)
    assert data["value"] == pytest.approx(0.0, abs=1e-15)  # a rotation
    assert np.allclose(data["gradient"], 0.0, atol=1e-14)


def test_eval_rejects_orientation_reversal(capsys):
    code, _, err = run(capsys, "eval", "hencky", *"1 0 0 0 -1 0 0 0 1".split())
    assert code == 2 and "GL+" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "hencky", "1", "0", "0"],
        ["eval", "nonsense", "1", "0", "0", "1"],
        ["eval", "hencky-ext", "--lambda", "-1", "1", "0", "0", "1"],
        ["scan", "coercivity", "hencky"],
        ["scan", "rank-one", "hencky-ext", "--lo", "-1"],
        ["scan", "agreement", "hencky"],
        ["minimize", "hencky-ext"],
        ["plot-data", "nope"],
    ],
)
def test_usage_and_config_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_plot_data_rows(capsys, tmp_path):
    code, out, _ = run(capsys, "plot-data", "phi")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "lambda,phi_gamma=0,phi_gamma=0.25,phi_gamma=0.5,phi_gamma=1"
    assert len(lines) == 590
    path = tmp_path / "psi.csv"
    assert run(capsys, "plot-data", "psi", "--points", "11", "-o", str(path))[0] == 0
    assert len(path.read_text().splitlines()) == 12


def test_scan_exit_codes_and_files(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "scan", "rank-one", "hencky-ext", "--samples", "5000", "--report", str(report))
    assert code == 0 and "PASS" in out
    assert json.loads(report.read_text())["tested"] == 5000

    wit = tmp_path / "w.csv"
    code, out, _ = run(capsys, "scan", "rank-one", "hencky", "--directed", "--witnesses", str(wit))
    assert code == 1
    assert len(wit.read_text().splitlines()) >= 2


def test_scan_agreement_either_order(capsys):
    assert run(capsys, "scan", "agreement", "hencky", "--against", "hencky-ext", "--samples", "2000")[0] == 0
    assert run(capsys, "scan", "agreement", "hencky-ext", "--samples", "2000")[0] == 0
    assert run(capsys, "scan", "agreement", "hencky", "--against", "hencky-ext", "--region", "0.05", "0.3",
               "--samples", "500", "--witnesses", "/dev/null")[0] == 1


def test_scan_is_byte_reproducible(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(capsys, "scan", "rank-one", "hencky", "--samples", "3000", "--seed", "4", "--report", str(p),
            "--witnesses", str(p.with_suffix(".csv")))
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".csv").read_bytes() == paths[1].with_suffix(".csv").read_bytes()


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"samples": 4000, "seed": 1, "mu": 2.0}))
    rep = tmp_path / "r.json"
    code, _, _ = run(capsys, "scan", "rank-one", "hencky-ext", "--config", str(cfg), "--samples", "700",
                     "--report", str(rep))
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["tested"] == 700 and data["config"]["seed"] == 1
    cfg.write_text(json.dumps({"samples": 10, "colour": "red"}))
    assert run(capsys, "scan", "rank-one", "hencky-ext", "--config", str(cfg))[0] == 2


def test_minimize(capsys, tmp_path):
    field = tmp_path / "f.csv"
    code, out, _ = run(capsys, "minimize", "hencky-ext", "--boundary", "1.2", "0", "0", "0.9",
                       "--resolution", "4", "--field", str(field))
    assert code == 0
    data = json.loads(out)
    assert data["converged"]
    assert data["energy"] == pytest.approx(data["homogeneous_energy"], rel=1e-6)
    assert len(field.read_text().splitlines()) == 26

    code, out, _ = run(capsys, "minimize", "hencky-ext", "--boundary", "1", "0", "0", "1")
    assert code == 0 and json.loads(out)["energy"] == pytest.approx(0.0, abs=1e-12)

    assert run(capsys, "minimize", "hencky-ext", "--boundary", "1", "0", "0", "-1")[0] == 2


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1", "10")
    assert code == 0
    assert out.count("[PASS]") == 2 and "2/2 criteria passed" in out


def test_module_entry_point_and_help():
    out = subprocess.run([sys.executable, "-m", "polyhencky", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("eval", "plot-data", "scan", "minimize", "verify"):
        assert cmd in out.stdout
