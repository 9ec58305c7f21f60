import json
import math
import subprocess
import sys

import numpy as np
import pytest

from s2body.cli import main

RATE = 2.0  # balance rate of the pi/4 polar pair


def polar_pair_doc():
    s = math.sin(math.pi / 4.0)
    bodies = []
    for sign in (1.0, -1.0):
        q = [sign * s, 0.0, s]
        v = list(RATE * np.cross([0.0, 0.0, 1.0], q))
        bodies.append({"mass": 1.0, "position": q, "velocity": v})
    return {"bodies": bodies, "space": "sphere", "potential": "cotangent"}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_simulate_writes_csv_pair(tmp_path, capsys):
    cfg = write(tmp_path, "sim.json", {
        "configuration": polar_pair_doc(), "dt": 1e-3, "steps": 50})
    out = str(tmp_path / "run")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    traj = (tmp_path / "run_trajectory.csv").read_text().splitlines()
    cons = (tmp_path / "run_conserved.csv").read_text().splitlines()
    assert len(traj) == 52 and len(cons) == 52
    assert traj[0].startswith("time,x0,y0,z0,")
    assert cons[0] == "time,kinetic,potential,total,cx,cy,cz"
    total = [float(r.split(",")[3]) for r in cons[1:]]
    assert max(total) - min(total) < 1e-12
    assert capsys.readouterr().out != ""


def test_simulate_quiet_silences_stdout(tmp_path, capsys):
    cfg = write(tmp_path, "sim.json", {
        "configuration": polar_pair_doc(), "dt": 1e-3, "steps": 5})
    assert main(["simulate", "--config", cfg, "--out",
                 str(tmp_path / "q"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_simulate_deterministic_reruns(tmp_path):
    cfg = write(tmp_path, "sim.json", {
        "configuration": polar_pair_doc(), "dt": 1e-3, "steps": 20})
    for tag in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out",
                     str(tmp_path / tag), "--quiet"]) == 0
    assert (tmp_path / "a_trajectory.csv").read_bytes() == \
        (tmp_path / "b_trajectory.csv").read_bytes()
    assert (tmp_path / "a_conserved.csv").read_bytes() == \
        (tmp_path / "b_conserved.csv").read_bytes()


def test_simulate_singular_exit(tmp_path):
    doc = {"configuration": {
        "bodies": [
            {"mass": 1.0, "position": [1.0, 0.0, 0.0], "velocity": [0.0, 1.0, 0.0]},
            {"mass": 1.0, "position": [0.0, 1.0, 0.0], "velocity": [1.0, 0.0, 0.0]},
        ]}, "dt": 1e-2, "steps": 500}
    cfg = write(tmp_path, "sing.json", doc)
    out = str(tmp_path / "sing")
    assert main(["simulate", "--config", cfg, "--out", out, "--quiet"]) == 3
    # partial trajectory still written
    lines = (tmp_path / "sing_trajectory.csv").read_text().splitlines()
    assert 2 < len(lines) < 502


def test_euler_flow_closed_form_gap(tmp_path):
    cfg = write(tmp_path, "ef.json", {
        "I": [1.0, 2.0, 3.0], "twoK": 2.0, "C2": 5.0,
        "dt": 1e-3, "steps": 2000})
    out = str(tmp_path / "ef")
    assert main(["euler-flow", "--config", cfg, "--out", out, "--quiet"]) == 0
    lines = (tmp_path / "ef_closed_form.csv").read_text().splitlines()
    assert lines[0] == "time,tau,Ox,Oy,Oz,Ox_closed,Oy_closed,Oz_closed,gap"
    gaps = [float(r.split(",")[-1]) for r in lines[1:]]
    assert max(gaps) < 1e-9
    omrows = (tmp_path / "ef_omega.csv").read_text().splitlines()
    assert omrows[0] == "time,tau,Ox,Oy,Oz,twoK,C2"
    twoK = [float(r.split(",")[5]) for r in omrows[1:]]
    assert max(twoK) - min(twoK) < 1e-10


def test_euler_flow_symmetric_top(tmp_path):
    cfg = write(tmp_path, "st.json", {
        "I": [1.0, 1.0, 2.0], "omega": [0.3, 0.0, 0.9],
        "dt": 1e-3, "steps": 500})
    out = str(tmp_path / "st")
    assert main(["euler-flow", "--config", cfg, "--out", out, "--quiet"]) == 0
    lines = (tmp_path / "st_closed_form.csv").read_text().splitlines()
    gaps = [float(r.split(",")[-1]) for r in lines[1:]]
    assert max(gaps) < 1e-8


def test_classify_payload(tmp_path):
    cfg = write(tmp_path, "cls.json", {
        "I": [1.0, 2.0, 3.0],
        "omega": [math.sqrt(1.0 / 1.0), 0.5, math.sqrt(0.5 / 3.0)]})
    out = str(tmp_path / "cls")
    assert main(["classify", "--config", cfg, "--out", out, "--quiet"]) == 0
    rep = json.loads((tmp_path / "cls_classification.json").read_text())
    assert set(rep) == {"tag", "I", "twoK", "C2", "k2"}
    assert rep["I"] == [1.0, 2.0, 3.0]
    assert rep["tag"].startswith("Asym")


def test_classify_rejects_descending_moments(tmp_path):
    cfg = write(tmp_path, "bad.json", {"I": [3.0, 2.0, 1.0],
                                       "omega": [1.0, 0.0, 0.0]})
    assert main(["classify", "--config", cfg, "--out",
                 str(tmp_path / "x"), "--quiet"]) == 2


def test_verify_theorem_report(tmp_path):
    cfg = write(tmp_path, "vt.json", {
        "configuration": polar_pair_doc(), "dt": 1e-3, "steps": 500})
    out = str(tmp_path / "vt")
    assert main(["verify-theorem", "--config", cfg, "--out", out,
                 "--quiet"]) == 0
    rep = json.loads((tmp_path / "vt_verification.json").read_text())
    assert rep["rigidity"]["is_rigid"] is True
    assert rep["re_fit"]["residual"] < 1e-7
    assert rep["classification"]["tag"] == "SymmetricTop"


def test_find_re_payload(tmp_path):
    doc = polar_pair_doc()
    for b in doc["bodies"]:
        b.pop("velocity")  # positions-only template
    cfg = write(tmp_path, "re.json", {
        "configuration": doc, "axis": [0.0, 0.0, 1.0],
        "omega_range": [0.5, 5.0]})
    out = str(tmp_path / "re")
    assert main(["find-re", "--config", cfg, "--out", out, "--quiet"]) == 0
    rep = json.loads((tmp_path / "re_re.json").read_text())
    assert rep["omega"] == pytest.approx(2.0, abs=1e-9)
    assert rep["residual"] < 1e-9
    assert rep["axis"] == [0.0, 0.0, 1.0]
    assert np.allclose(rep["omega_vector"], [0.0, 0.0, rep["omega"]])


def test_contours_quadric_residuals(tmp_path):
    cfg = write(tmp_path, "cont.json", {
        "I": [1.0, 2.0, 3.0], "twoK": 2.0, "n_contours": 5, "samples": 64})
    out = str(tmp_path / "cont")
    assert main(["contours", "--config", cfg, "--out", out, "--quiet"]) == 0
    lines = (tmp_path / "cont_contours.csv").read_text().splitlines()
    assert lines[0] == "C2,k2,branch,tau,Ox,Oy,Oz"
    I = np.array([1.0, 2.0, 3.0])
    branches = set()
    for row in lines[1:]:
        parts = row.split(",")
        C2 = float(parts[0])
        branches.add(parts[2])
        om = np.array([float(v) for v in parts[4:7]])
        twoK = float(np.sum(I * om * om))
        c2 = float(np.sum(I * I * om * om))
        assert abs(twoK - 2.0) < 1e-9
        assert abs(c2 - C2) < 1e-9
    # all six fixed points plus at least one closed loop and the separatrix
    assert {"fixed+x", "fixed-x", "fixed+y", "fixed-y",
            "fixed+z", "fixed-z"} <= branches
    assert any(b.startswith("sep") for b in branches)


def test_exit_code_missing_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "x"), "--quiet"]) == 4


def test_exit_code_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{broken")
    assert main(["simulate", "--config", str(p), "--out",
                 str(tmp_path / "x"), "--quiet"]) == 2


def test_exit_code_bad_schema(tmp_path):
    cfg = write(tmp_path, "bad.json", {"configuration": {"bodies": []}})
    assert main(["simulate", "--config", cfg, "--out",
                 str(tmp_path / "x"), "--quiet"]) == 2
    cfg = write(tmp_path, "bad2.json", {
        "configuration": polar_pair_doc(), "dt": -1.0})
    assert main(["simulate", "--config", cfg, "--out",
                 str(tmp_path / "x"), "--quiet"]) == 2


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, "sim.json", {
        "configuration": polar_pair_doc(), "dt": 1e-3, "steps": 5})
    r = subprocess.run([sys.executable, "-m", "s2body.cli", "simulate",
                        "--config", cfg, "--out", str(tmp_path / "m")],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert (tmp_path / "m_trajectory.csv").exists()
