import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from svanish import LayeredStructure, io
from svanish.cli import RunConfig, build_parser, config_from_args, main


@pytest.fixture
def vacuum_file(tmp_path):
    path = tmp_path / "vacuum.json"
    io.save_structure(path, LayeredStructure.uniform_radii([1.0] * 2, [1.0] * 2))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_wcoef_vacuum_slopes(tmp_path, vacuum_file):
    out = tmp_path / "w.csv"
    assert main(["wcoef", "--structure", vacuum_file, "--tmin", "1e-3", "--tmax", "1", "--tcount", "13", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["t", "abs_W1_TE", "abs_W1_TM", "abs_W2_TE", "abs_W2_TM"]
    small = data[:5]
    for col, n in zip(range(1, 5), (1, 1, 2, 2)):
        assert np.all(np.diff(small[:, col]) > 0)
        slope = np.polyfit(np.log(small[:, 0]), np.log(small[:, col]), 1)[0]
        assert slope == pytest.approx(2 * n + 1, abs=0.05)
    meta = json.loads((tmp_path / "w.meta.json").read_text())
    assert meta["structure_hash"] == io.structure_hash(io.load_structure(vacuum_file))


def test_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["farfield", "--ntheta", "4", "--nphi", "3", "--out", str(tmp_path / f"{name}.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_farfield_columns_and_sidecar(tmp_path):
    out = tmp_path / "ff.csv"
    assert main(["farfield", "--omega", "0.5", "--ntheta", "3", "--nphi", "2", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["theta", "phi", "re_A1", "re_A2", "re_A3", "im_A1", "im_A2", "im_A3"]
    assert data.shape == (6, 8)
    meta = json.loads((tmp_path / "ff.meta.json").read_text())
    assert {"omega", "c", "khat", "n_max", "structure_hash"} <= set(meta)


def test_lowfreq_json(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["lowfreq", "--order", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "svanish-coeffs/1" and len(doc["entries"]) == 6
    assert "W_{n,l}" in capsys.readouterr().out


def test_xsection_sweep(tmp_path, vacuum_file):
    out = tmp_path / "x.csv"
    assert main(["xsection", "--structure", vacuum_file, "--tmin", "0.1", "--tmax", "1", "--tcount", "3", "--out", str(out)]) == 0
    _, data = read_csv(out)
    np.testing.assert_allclose(data[:, 1], data[:, 2], rtol=1e-10)
    np.testing.assert_allclose(data[:, 4], 1.0, rtol=1e-12)  # vacuum layers are the bare sphere


def test_cloak_map(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["cloak-map", "--rho", "0.05", "--rcount", "4", "--ndirs", "2", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header[:3] == ["x1", "x2", "x3"] and len(header) == 15
    assert json.loads((tmp_path / "c.meta.json").read_text())["rho"] == 0.05


def test_design_small_problem(tmp_path):
    problem = tmp_path / "p.json"
    io.write_json(problem, {"schema": "svanish-design/1", "radii": [2, 1], "mu0": [2], "eps0": [2], "order": 1})
    out = tmp_path / "r.json"
    assert main(["design", "--problem", str(problem), "--order", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["converged"] and doc["residual_norm"] <= 1e-10


def test_design_not_converged_is_numeric_failure(tmp_path):
    out = tmp_path / "r.json"
    assert main(["design", "--max-iters", "2", "--out", str(out)]) == 3
    assert json.loads(out.read_text())["iterations"] == 2


@pytest.mark.parametrize(
    "doc",
    [
        {"schema": "svanish-structure/9", "radii": [2, 1], "mu": [1], "eps": [1]},
        {"schema": "svanish-structure/1", "radii": [2, 1], "mu": [1]},
        {"schema": "other/1"},
    ],
)
def test_schema_violation_exit_2(tmp_path, doc, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["lowfreq", "--structure", str(path)]) == 2
    assert "field" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["wcoef", "--structure", str(tmp_path / "nope.json")]) == 2


def test_numeric_failure_exit_3(tmp_path):
    # polarization parallel to the incidence direction
    assert main(["farfield", "--pol", "0", "0", "1", "--out", str(tmp_path / "f.csv")]) == 3


def test_config_round_trip(tmp_path):
    ns = build_parser().parse_args(["xsection", "--omega", "0.25", "--pol", "0", "1", "0"])
    cfg = config_from_args(ns)
    back = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg
    path = tmp_path / "cfg.json"
    io.write_json(path, cfg.to_dict())
    # flags given next to --config are ignored
    assert config_from_args(build_parser().parse_args(["xsection", "--omega", "9", "--config", str(path)])) == cfg


def test_config_rejects_unknown_field():
    doc = RunConfig("wcoef").to_dict()
    doc["colour"] = "red"
    with pytest.raises(Exception) as info:
        RunConfig.from_dict(doc)
    assert getattr(info.value, "field", None) == "colour"


@pytest.mark.skipif(shutil.which("svanish") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["svanish", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for sub in ("wcoef", "lowfreq", "design", "farfield", "xsection", "cloak-map", "verify"):
        assert sub in out.stdout
