"""Command line: exit codes, report files, determinism."""

import json
import os

import numpy as np

from currentflow.acapprox import Sampled1D, sampled_to_csv
from currentflow.cli import main

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def write_scenario(tmp_path, mutate=None):
    with open(os.path.join(SCENARIOS, "zero_field.json")) as fh:
        data = json.load(fh)
    if mutate:
        mutate(data)
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_flow_writes_table(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["flow", os.path.join(SCENARIOS, "zero_field.json"), "--out", str(out)])
    assert rc == 0
    table = (out / "flow.csv").read_text().strip().splitlines()
    assert table[0] == "time,point_index,x0,x1"
    assert len(table) == 1 + 17 * 2


def test_transport_and_residual(tmp_path):
    out = tmp_path / "out"
    rc = main(["transport", os.path.join(SCENARIOS, "linear_field.json"),
               "--out", str(out)])
    assert rc == 0
    traj = json.loads((out / "trajectory.json").read_text())
    assert len(traj["currents"]) == len(traj["times"])

    rc = main(["residual", os.path.join(SCENARIOS, "zero_field.json"),
               "--refine", "2", "--dict-size", "4", "--out", str(out)])
    assert rc == 0
    study = json.loads((out / "residuals.json").read_text())
    assert len(study["reports"]) == 2


def test_schema_violations_exit_2(tmp_path, capsys):
    rc = main(["flow", write_scenario(tmp_path, lambda d: d.pop("box"))])
    assert rc == 2
    assert "$.box" in capsys.readouterr().err

    rc = main(["flow", write_scenario(
        tmp_path, lambda d: d["field"].update(family="warp"))])
    assert rc == 2
    assert "field.family" in capsys.readouterr().err

    rc = main(["flow", str(tmp_path / "missing.json")])
    assert rc == 2


def test_inadmissible_field_exits_1(tmp_path, capsys):
    def make_inadmissible(d):
        d["field"] = {"family": "linear", "matrix": [[1.0, 0.0], [0.0, 1.0]],
                      "modulation": "inv_t"}
    rc = main(["flow", write_scenario(tmp_path, make_inadmissible)])
    assert rc == 1
    assert "class-(L)" in capsys.readouterr().err


def test_maximal_subcommand(tmp_path):
    t = np.linspace(0.0, 1.0, 501)
    sampled_to_csv(Sampled1D(t, np.abs(np.sin(7 * t))), tmp_path / "g.csv")
    out = tmp_path / "out"
    rc = main(["maximal", str(tmp_path / "g.csv"), "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "maximal.json").read_text())
    assert 0.0 < report["weak_1_1_constant"] <= 2.0 + 1e-6


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main(["residual", os.path.join(SCENARIOS, "shear_dirac.json"),
                   "--refine", "2", "--seed", "7", "--out", str(out)])
        assert rc == 0
    assert (a / "residuals.json").read_bytes() == (b / "residuals.json").read_bytes()
    assert (a / "residuals.csv").read_bytes() == (b / "residuals.csv").read_bytes()
