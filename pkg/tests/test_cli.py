import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fracns.cli import RunReport, main, parse_config, run
from fracns.exceptions import SchemaError, ValidityError

MINIMAL = {"mode": "scalar", "s": 0.8, "p": 2, "N": 1, "lambda": [1], "mu": [1],
           "grid": {"L": 40, "n": 2048}}


def dump(d):
    return json.dumps(d).encode()


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_minimal_config_gets_defaults():
    cfg = parse_config(dump(MINIMAL))
    assert cfg.mode == "scalar"
    assert cfg.solver.tol_dual_residual == 1e-10
    assert cfg.solver.max_iterations == 20000
    assert (cfg.grid_length, cfg.grid_points) == (40.0, 2048)


def test_validity_error_quotes_constraint():
    bad = dict(MINIMAL, s=0.3, N=3)
    with pytest.raises(ValidityError, match=r"s > \(p-1\)N/\(2p\).*0\.75"):
        parse_config(dump(bad))


def test_three_dimensions_rejected_clearly():
    with pytest.raises(ValidityError, match="N=3"):
        parse_config(dump(dict(MINIMAL, s=0.9, N=3)))


@pytest.mark.parametrize("change, path", [
    ({"beta": [[0, 1], [2, 0]], "lambda": [1, 1], "mu": [1, 1]}, "beta"),
    ({"grid": {"L": 40, "n": 2048, "spacing": 1}}, "grid"),
    ({"colour": "red"}, ""),
    ({"s": "half"}, "s"),
    ({"solver": {"step": -1}}, "solver.step"),
    ({"grid": {"L": 40, "n": 15}}, "grid"),
    ({"mu": [1, 2]}, "mu"),
])
def test_schema_errors_carry_path(change, path):
    with pytest.raises(SchemaError) as info:
        parse_config(dump(dict(MINIMAL, **change)))
    assert info.value.path == path
    assert info.value.exit_code == 2


def test_missing_fields_and_bad_json():
    with pytest.raises(SchemaError):
        parse_config(b'{"mode": "system"}')
    with pytest.raises(SchemaError):
        parse_config(b"{not json")
    with pytest.raises(SchemaError):
        parse_config(dump({"mode": "continue", **{k: MINIMAL[k] for k in ("s", "p", "N", "lambda", "mu")}}))
    with pytest.raises(SchemaError):
        parse_config(dump(dict(MINIMAL, mode="continue", eps_list=[0.1, 0.01])))


def test_sech_report_energy_identity(tmp_path):
    cfg = parse_config(dump(dict(MINIMAL, s=1)))
    report = run(cfg, out_dir=str(tmp_path))
    res = report.results[0]
    assert report.exit_code == 0
    assert abs(res["phi"] - 0.25 * res["norm_sq"]) <= 1e-10 * res["phi"]
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["results"][0]["phi"] == res["phi"]
    assert on_disk["schema_version"] == "1.0"


def test_fields_csv_format(tmp_path):
    cfg = parse_config(dump(dict(MINIMAL, grid={"L": 20, "n": 64})))
    run(cfg, out_dir=str(tmp_path))
    raw = (tmp_path / "fields.csv").read_bytes()
    lines = raw.decode().split("\n")
    assert lines[0] == "x,u_1"
    assert raw.endswith(b"\n") and b"\r" not in raw
    data = np.loadtxt(tmp_path / "fields.csv", delimiter=",", skiprows=1)
    assert data.shape == (64, 2)
    assert data[0, 0] == -10.0


def test_two_dimensional_fields(tmp_path):
    cfg = parse_config(dump({"mode": "scalar", "s": 0.8, "p": 2, "N": 2, "lambda": [1],
                             "mu": [1], "grid": {"L": 20, "n": 32}}))
    run(cfg, out_dir=str(tmp_path))
    lines = (tmp_path / "fields.csv").read_text().splitlines()
    assert lines[0] == "x,y,u_1" and len(lines) == 1 + 32 * 32


def test_continue_mode_writes_branch(tmp_path):
    cfg = parse_config(dump({"mode": "continue", "s": 1, "p": 2, "N": 1, "lambda": [1, 2],
                             "mu": [1, 1], "eps_list": [0, 0.001, 0.01],
                             "grid": {"L": 40, "n": 512}}))
    report = run(cfg, out_dir=str(tmp_path))
    assert report.exit_code == 0
    rows = (tmp_path / "branch.csv").read_text().splitlines()
    assert rows[0] == "eps,phi,distance_to_z,min_component"
    assert len(rows) == 4
    assert [r["classification"] for r in report.results] == ["positive"] * 3


def test_thresholds_mode(tmp_path):
    cfg = parse_config(dump({"mode": "thresholds", "s": 1, "p": 2, "N": 1, "lambda": [1, 1],
                             "mu": [1, 1], "beta": 1, "lambda_candidates": [1],
                             "grid": {"L": 40, "n": 512}}))
    res = run(cfg, out_dir=str(tmp_path)).results[0]
    assert (res["H_lhs"], res["H_rhs"], res["H_holds"]) == (4.0, 8.0, False)
    assert res["Lambda"] == pytest.approx(1.0, rel=1e-10)
    assert res["gamma_sq"][0][0] is None


def test_failure_leaves_only_report(tmp_path):
    good = parse_config(dump(dict(MINIMAL, grid={"L": 20, "n": 64})))
    run(good, out_dir=str(tmp_path))
    assert (tmp_path / "fields.csv").exists()
    bad = parse_config(dump(dict(MINIMAL, grid={"L": 20, "n": 64},
                                 solver={"max_iterations": 1, "newton_max_steps": 1})))
    report = run(bad, out_dir=str(tmp_path))
    assert report.exit_code == 4
    assert sorted(os.listdir(tmp_path)) == ["report.json"]
    err = json.loads((tmp_path / "report.json").read_text())["error"]
    assert err["type"] == "NoConvergence" and err["exit_code"] == 4


def test_branch_loss_exit_code(tmp_path):
    cfg = parse_config(dump({"mode": "continue", "s": 1, "p": 2, "N": 1, "lambda": [1, 2],
                             "mu": [1, 1], "eps_list": [0.001, -3.0],
                             "grid": {"L": 40, "n": 512}}))
    report = run(cfg, out_dir=str(tmp_path))
    assert report.exit_code == 6
    assert len(report.error["partial_results"]) == 1
    assert sorted(os.listdir(tmp_path)) == ["report.json"]


def test_nonprojectable_exit_code(tmp_path):
    cfg = parse_config(dump({"mode": "system", "s": 0.8, "p": 2, "N": 1, "lambda": [1, 1],
                             "mu": [1, 1], "beta": -1e6, "grid": {"L": 20, "n": 64},
                             "solver": {"starts": ["coupled_bump"]}}))
    assert run(cfg, out_dir=str(tmp_path)).exit_code == 5


def test_report_round_trip_is_exact():
    rep = RunReport(mode="scalar", config={"s": 0.1 + 0.2},
                    results=[{"phi": 1 / 3, "x": [np.pi, np.nextafter(1.0, 2.0)]}])
    back = RunReport.from_json(rep.to_json())
    assert back.results[0]["phi"] == 1 / 3
    assert back.results[0]["x"][1] == np.nextafter(1.0, 2.0)
    assert back.config["s"] == 0.1 + 0.2


def test_main_exit_codes(tmp_path, capsys):
    assert main(["scalar", "--config", write_cfg(tmp_path, dict(MINIMAL, s=0.3, N=3)),
                 "--out", str(tmp_path / "o1")]) == 3
    assert main(["scalar", "--config", write_cfg(tmp_path, dict(MINIMAL, bogus=1)),
                 "--out", str(tmp_path / "o2")]) == 2
    assert json.loads((tmp_path / "o2" / "report.json").read_text())["exit_code"] == 2
    assert main(["system", "--config", write_cfg(tmp_path, MINIMAL)]) == 2
    assert main(["scalar", "--config", str(tmp_path / "missing.json")]) == 2
    small = dict(MINIMAL, grid={"L": 20, "n": 64})
    assert main(["scalar", "--config", write_cfg(tmp_path, small), "--out", str(tmp_path / "o3"),
                 "--seed", "5"]) == 0
    rep = json.loads((tmp_path / "o3" / "report.json").read_text())
    assert rep["config"]["solver"]["rng_seed"] == 5


def test_verify_fast_via_subprocess(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fracns", "verify", "--fast", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "0 failed" in proc.stdout
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["results"][-1]["failed"] == 0
