import csv
import io
import json
import math
import subprocess
import sys

import pytest

from riesz_stability.cli import (
    EXIT_FAIL,
    EXIT_INPUT,
    EXIT_OK,
    InputError,
    ScanConfig,
    cmd_ball,
    cmd_multipliers,
    cmd_scan,
    cmd_verify,
    main,
)
from riesz_stability.families import make_family, perturbed_ball
from riesz_stability.star_sets import RaySet


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_multipliers_newton():
    rows, ok = cmd_multipliers(3, 2.0, 4)
    assert ok
    for r in rows:
        assert r["beta"] == pytest.approx(1 / (2 * r["k"] + 1), abs=1e-12)
        assert r["abs_diff"] < 1e-8


def test_multipliers_planar_ratio():
    rows, ok = cmd_multipliers(2, 1.5, 1)
    assert ok
    assert rows[1]["beta"] / rows[0]["beta"] == pytest.approx(1 / 3, rel=1e-12)


def test_ball_constants():
    row = cmd_ball(3, 2.0)
    assert row["phi_sphere"] == pytest.approx(1 / 3, abs=1e-8)
    assert row["energy"] == pytest.approx(8 * math.pi / 15, abs=1e-6)
    assert row["grad_fd_residual"] < 1e-5
    assert row["identity_residual"] < 1e-10


def test_scan_config_validation():
    with pytest.raises(InputError):
        ScanConfig(3, 3.5)
    with pytest.raises(InputError):
        ScanConfig(9, 2.0)
    with pytest.raises(InputError):
        ScanConfig(3, 2.0, eps_min=0.1, eps_max=0.05)
    with pytest.raises(InputError):
        ScanConfig(3, 2.0, eps_max=0.3)
    with pytest.raises(InputError):
        ScanConfig(3, 2.0, family="blob")
    cfg = ScanConfig(3, 2.0)
    assert len(cfg.eps_grid) == 8
    assert cfg.eps_grid[0] == pytest.approx(0.005) and cfg.eps_grid[-1] == pytest.approx(0.05)


def test_scan_ring_fit():
    reports, fit, ok = cmd_scan(ScanConfig(3, 2.0, "ring"))
    assert ok
    assert fit["exponent"] == pytest.approx(2.0, abs=0.05)
    assert fit["prefactor"] == pytest.approx(1 / 3, rel=0.1)


def test_scan_squeeze_fit():
    _, fit, ok = cmd_scan(ScanConfig(3, 2.0, "squeeze"))
    assert ok
    assert fit["prefactor"] == pytest.approx(2 / 15, rel=0.1)


def test_scan_translate_vanishes():
    reports, fit, ok = cmd_scan(ScanConfig(3, 2.0, "translate", eps_steps=4))
    assert ok
    for r in reports:
        assert abs(r.delta) <= 3 * r.error + 1e-9


def test_verify_small():
    rows, summary = cmd_verify(3, 2.0, 3, 0, [0.01, 0.03])
    assert summary["pass"] and summary["violations"] == 0
    assert summary["checked"] + summary["skipped"] == 6
    assert summary["ring_ratio_centered"] == pytest.approx(summary["ring_ratio_model"], rel=0.1)


def test_verify_flags_violations_for_large_constant():
    _, summary = cmd_verify(3, 2.0, 2, 0, [0.02], constant=10.0)
    assert not summary["pass"]


def test_main_multipliers_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["multipliers", "--n", "3", "--lambda", "2", "--K", "4", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert list(rows[0]) == ["k", "beta", "beta_direct", "abs_diff"]
    assert [float(r["beta"]) for r in rows] == pytest.approx([1, 1 / 3, 1 / 5, 1 / 7, 1 / 9], abs=1e-12)


def test_main_ball_json(tmp_path):
    out = tmp_path / "b.json"
    assert main(["ball", "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["pass"] is True
    assert doc["rows"][0]["phi_sphere"] == pytest.approx(1 / 3, abs=1e-8)


def test_main_scan_csv_header(tmp_path):
    out = tmp_path / "s.csv"
    rc = main(["scan", "--family", "ring", "--eps-steps", "3", "--out", str(out)])
    assert rc == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 3
    assert "delta" in rows[0] and "error" in rows[0] and "quad_error" in rows[0]


def test_main_input_errors(tmp_path, capsys):
    assert main(["ball", "--lambda", "5"]) == EXIT_INPUT
    assert main(["scan", "--eps-min", "0.3", "--eps-max", "0.4"]) == EXIT_INPUT
    assert main(["reduce", str(tmp_path / "missing.json")]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["reduce", str(bad)]) == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--family", "blob"])
    assert exc.value.code == 2


def test_main_verify_fail_exit(tmp_path):
    out = tmp_path / "v.csv"
    rc = main(["verify", "--trials", "1", "--eps-steps", "1", "--eps-min", "0.02", "--constant-C", "10", "--out", str(out)])
    assert rc == EXIT_FAIL


def test_verify_is_byte_identical(tmp_path):
    args = ["verify", "--trials", "3", "--eps-steps", "2", "--seed", "5"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(["verify", "--trials", "3", "--eps-steps", "2", "--seed", "6", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_main_reduce(tmp_path):
    src = tmp_path / "a.json"
    src.write_text(perturbed_ball(3, 1).to_json())
    out, rep = tmp_path / "t.json", tmp_path / "r.json"
    assert main(["reduce", str(src), "--out", str(out), "--report", str(rep)]) == EXIT_OK
    At = RaySet.from_json(out.read_text())
    report = json.loads(rep.read_text())
    assert report["P3"] is True
    assert abs(report["P4"]) < 1e-9
    assert At.n == 3


def test_main_reduce_dimension_mismatch(tmp_path):
    src = tmp_path / "a.json"
    src.write_text(make_family("ring", 2, 0.001).to_json())
    assert main(["reduce", str(src), "--n", "3"]) == EXIT_INPUT


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "riesz_stability.cli", "multipliers", "--K", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    rows = list(csv.DictReader(io.StringIO(proc.stdout)))
    assert len(rows) == 3
