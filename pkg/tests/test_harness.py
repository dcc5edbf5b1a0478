import csv
import io
import json

import numpy as np
import pytest

from necklab.exceptions import ConfigError, DegenerateAxis
from necklab.grid import load_field
from necklab.harness.cli import main
from necklab.harness.config import config_from_dict
from necklab.harness.experiments import RECORD_FIELDS, run_degeneration, run_single
from necklab.harness.export import export, render_svg, table_to_csv

FAMILY = {"kind": "degeneration", "family": {"l_schedule": [0.2, 0.1, 0.05, 0.025]}}


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


# --- configuration --------------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    {"kind": "nope"},
    {"extra": 1},
    {"grid": {"n_t": 10, "bogus": 1}},
    {"field": {"type": "torus_knot"}},
    {"solver": {"method": "multigrid"}},
    {"solver": {"unknown": 1}},
    {"seed": -1},
    {"kind": "degeneration", "family": {"l_schedule": [0.1, 0.2, 0.05]}},
    {"kind": "degeneration", "family": {"l_schedule": [0.2, 0.1]}},
    {"kind": "degeneration", "family": {"l_schedule": [3.0, 0.2, 0.1]}},
    {"kind": "degeneration", "family": {"rule": "wobble"}},
    {"target": {"name": "klein_bottle"}},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_config_defaults():
    cfg = config_from_dict({})
    assert cfg.kind == "single" and cfg.solve_config().method == "newton"
    fam = config_from_dict({"kind": "degeneration", "family": {"rule": "power_law", "c": 2, "p": 1}}).family
    assert fam.slope(4.0) == 0.5


# --- experiments ----------------------------------------------------------------------

@pytest.mark.parametrize("slope, relax", [(0.5, "field"), (0.25, "interpolation")])
def test_run_single_geodesic(slope, relax):
    # the interpolation follows the shorter arc, so it only reproduces the ansatz when a*Lam < pi
    cfg = config_from_dict({"field": {"type": "geodesic", "slope": slope, "relax_from": relax},
                            "solver": {"tol_tension": 1e-10}})
    rep, f = run_single(cfg)
    assert rep["pass"]
    iv = rep["invariants"]
    assert iv["energy"] == pytest.approx(np.pi * slope**2 * 10, rel=1e-3)
    assert iv["avg_length"] == pytest.approx(np.sqrt(2 * np.pi) * slope * 10, rel=1e-3)
    assert iv["alpha"]["alpha_re"] == pytest.approx(2 * np.pi * slope**2, rel=1e-3)


def test_run_single_constant():
    rep, _ = run_single(config_from_dict({"field": {"type": "constant"}}))
    iv = rep["invariants"]
    assert rep["pass"] and iv["energy"] == 0 and iv["avg_length"] == 0
    assert rep["decomposition"]["case"] == "AllNeck"


def test_run_single_bubble_is_mixed():
    cfg = config_from_dict({"grid": {"t_min": -20, "t_max": 20, "n_t": 401, "n_th": 32},
                            "field": {"type": "bubble"}})
    rep, _ = run_single(cfg)
    assert rep["decomposition"]["case"] == "Mixed"


def test_degeneration_examples():
    rows, v = run_degeneration(config_from_dict({**FAMILY, "family": {**FAMILY["family"], "D": 1.0}}))
    assert v["regime"] == 3
    assert [r["l"] for r in rows] == [0.2, 0.1, 0.05, 0.025]
    for r in rows:
        assert r["status"] == "ok" and r["bounds_pass"]
        assert r["E_neck"] == pytest.approx(np.pi / r["cylinder_length"], rel=1e-3)
        assert r["L_neck"] == pytest.approx(np.sqrt(2 * np.pi), rel=1e-3)
        assert abs(r["E_neck"] - r["identity_energy"]) <= 1e-6 * max(1, r["E_neck"])
    e = np.log([r["E_neck"] for r in rows])
    lam = np.log([r["cylinder_length"] for r in rows])
    assert np.polyfit(lam, e, 1)[0] == pytest.approx(-1, abs=0.05)

    rows, v = run_degeneration(config_from_dict({**FAMILY, "family": {**FAMILY["family"],
                                                                      "rule": "fixed_slope", "a": 0.0}}))
    assert v["regime"] == 4 and v["w12"] and v["c0"]
    assert all(r["alpha_re"] == 0 and r["E_neck"] == 0 for r in rows)

    rows, v = run_degeneration(config_from_dict({**FAMILY, "family": {**FAMILY["family"],
                                                                      "rule": "power_law", "c": 1.0, "p": 0.5}}))
    assert v["regime"] == 1 and not v["w12"]
    assert all(r["E_neck"] == pytest.approx(np.pi, rel=1e-3) for r in rows)


def test_im_alpha_diagnostic_non_increasing():
    rows, _ = run_degeneration(config_from_dict({**FAMILY, "family": {**FAMILY["family"], "rule": "power_law",
                                                                      "p": 0.75, "c": 0.5}}))
    im = [r["im_diag"] for r in rows]
    assert all(b <= a * 1.1 + 1e-12 for a, b in zip(im, im[1:]))


# --- export ---------------------------------------------------------------------------

ROWS = [{"a": 1.0 / 3, "b": True, "c": "x,y", "d": None, "e": float("nan")},
        {"a": 2.0, "b": False, "c": "z", "d": 3, "e": 1e-20}]
COLS = ["a", "b", "c", "d", "e"]


def test_csv_shape():
    text = table_to_csv(ROWS[:1], COLS)
    lines = text.splitlines()
    assert len(lines) == 2 and lines[0] == "a,b,c,d,e"
    assert lines[1].startswith("0.333333333333,true,")
    for rec in csv.reader(io.StringIO(table_to_csv(ROWS, COLS))):
        assert len(rec) == len(COLS)
    with pytest.raises(ValueError):
        table_to_csv([], COLS)


def test_json_round_trip(tmp_path):
    p = export(ROWS, COLS, tmp_path / "t.json", "json")
    back = json.loads(p.read_text())
    assert back[1] == ROWS[1]
    assert back[0]["e"] is None and back[0]["a"] == ROWS[0]["a"]


def test_export_byte_stable(tmp_path):
    a = export(ROWS, COLS, tmp_path / "a.csv").read_bytes()
    b = export(ROWS, COLS, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_svg(tmp_path):
    svg = render_svg({"E": [(1, 1), (10, 0.1)], "L": [(1, 2), (10, 2)]}, tmp_path / "p.svg")
    assert svg.count("<polyline") == 2 and svg.startswith("<svg")
    assert (tmp_path / "p.svg").read_text() == svg
    with pytest.raises(ValueError):
        render_svg({})
    with pytest.raises(ValueError):
        render_svg({"E": [(1, 1)]})
    with pytest.raises(DegenerateAxis):
        render_svg({"E": [(2, 1), (2, 3)]})


# --- command line ---------------------------------------------------------------------

def test_cli_solve_and_check(tmp_path, capsys):
    cfg = write(tmp_path, {"field": {"type": "geodesic", "slope": 0.3}, "grid": {"n_t": 81}})
    out = tmp_path / "run"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["pass"]
    f = load_field(out / "solution.field")
    assert f.grid.n_t == 81
    assert main(["check", str(out / "solution.field"), "--out", str(tmp_path / "c.json")]) == 0
    assert json.loads((tmp_path / "c.json").read_text())["checks_pass"]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve", "--config", write(tmp_path, {"bogus": 1})]) == 2
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["degenerate", "--config", write(tmp_path, FAMILY), "--threads", "0"]) == 2
    assert main(["collar", "--l", "5"]) == 1
    assert main(["collar", "--l", "0.1", "--delta", "0.01"]) == 1
    junk = tmp_path / "junk.field"
    junk.write_text("hello\n")
    assert main(["check", str(junk)]) == 1
    assert main(["check", str(tmp_path / "absent.field")]) == 1
    # a solve that stops before converging is a failed check
    slow = write(tmp_path, {"field": {"type": "perturbed", "slope": 0.1, "amplitude": 0.1},
                            "grid": {"n_t": 41}, "solver": {"method": "explicit", "max_iters": 3},
                            "out": str(tmp_path / "slow")}, "slow.json")
    assert main(["solve", "--config", slow]) == 1


def test_cli_collar(capsys):
    assert main(["collar", "--l", "0.1", "--delta", "0.881373587019543", "--format", "json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["T1"] == pytest.approx(3.1442139261, rel=1e-9)
    assert main(["collar", "--l", "0.1", "--l", "0.5"]) == 0
    assert "core_t" in capsys.readouterr().out


def test_cli_degenerate_outputs(tmp_path, capsys):
    cfg = write(tmp_path, FAMILY)
    out = tmp_path / "fam"
    assert main(["degenerate", "--config", cfg, "--out", str(out), "--svg"]) == 0
    rows = list(csv.reader(open(out / "family.csv")))
    assert rows[0] == list(RECORD_FIELDS) and len(rows) == 5
    assert json.loads((out / "verdict.json").read_text())["verdict"]["regime"] == 3
    assert (out / "E_neck.svg").read_text().count("<polyline") == 1
    assert main(["degenerate", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    assert len(json.loads((out / "family.json").read_text())) == 4


def test_cli_seed_determinism(tmp_path, capsys):
    data = {"field": {"type": "perturbed", "slope": 0.1, "amplitude": 0.05}, "grid": {"n_t": 81}}
    cfg = write(tmp_path, data)
    for k, seed in enumerate((3, 3, 4)):
        main(["solve", "--config", cfg, "--out", str(tmp_path / f"s{k}"), "--seed", str(seed)])
    a, b, c = ((tmp_path / f"s{k}" / "solution.field").read_bytes() for k in range(3))
    assert a == b and a != c
