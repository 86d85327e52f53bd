import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from vortexeq import cli

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"

DEMOS = [
    ("energy", "energy_sphere", ["energy.json"]),
    ("grad", "energy_sphere", ["grad.json"]),
    ("simulate", "simulate_sphere", ["trajectory.csv", "simulate.json"]),
    ("find-eq", "find_eq_sphere", ["critical_points.json", "find_eq.json"]),
    ("find-eq", "find_eq_torus", ["critical_points.json", "find_eq.json"]),
    ("fiber-scan", "fiber_scan", ["fiber_collapse.csv", "fiber_intersections.csv", "fiber_scan.json"]),
    ("maxn", "maxn_four", ["maxn.json"]),
    ("coupling", "coupling_three", ["coupling.json"]),
    ("check", "check_three_sources", ["check.json"]),
]


def run_cli(sub, config, out_dir, *extra):
    return cli.run([sub, "--config", str(config), "--out-dir", str(out_dir), *extra])


def write_config(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


@pytest.mark.parametrize("sub, name, files", DEMOS)
def test_demo_configs_run(sub, name, files, tmp_path, capsys):
    assert run_cli(sub, CONFIGS / f"{name}.yaml", tmp_path) == cli.EXIT_OK
    for f in files:
        assert (tmp_path / f).is_file()
    printed = json.loads(capsys.readouterr().out)
    assert isinstance(printed, dict)
    assert not [p for p in tmp_path.iterdir() if p.name not in files]


def test_maxn_example(tmp_path):
    run_cli("maxn", CONFIGS / "maxn_four.yaml", tmp_path)
    out = json.loads((tmp_path / "maxn.json").read_text())
    assert out["n_exact"] == 5


def test_check_three_sources(tmp_path):
    run_cli("check", CONFIGS / "check_three_sources.yaml", tmp_path)
    out = json.loads((tmp_path / "check.json").read_text())
    cond = out["conditions"]
    assert cond["compactness"]["holds"] is True
    assert cond["integer_coupling_capacity"]["holds"] is True
    assert cond["integer_coupling_capacity"]["lhs"] == cond["integer_coupling_capacity"]["rhs"]
    assert out["A"] < 0


def test_coupling_three_is_tight(tmp_path):
    run_cli("coupling", CONFIGS / "coupling_three.yaml", tmp_path)
    out = json.loads((tmp_path / "coupling.json").read_text())
    assert out["feasible"] is True
    assert out["slack"] == [0, 0, 0]


def test_fixed_point_trajectory_is_static(tmp_path):
    run_cli("simulate", CONFIGS / "simulate_fixed_point.yaml", tmp_path)
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    assert header[0] == "t"
    assert len(body) > 2
    assert all(row[1:] == body[0][1:] for row in body)


def test_fiber_scan_matches_prediction(tmp_path):
    run_cli("fiber-scan", CONFIGS / "fiber_scan.yaml", tmp_path)
    out = json.loads((tmp_path / "fiber_scan.json").read_text())
    assert out["relative_error"] < 0.05
    assert out["intersections_match"] is True
    assert all(s["delta"] > 0 for s in out["separation"])


def test_find_eq_sphere_equatorial(tmp_path):
    run_cli("find-eq", CONFIGS / "find_eq_sphere.yaml", tmp_path)
    out = json.loads((tmp_path / "critical_points.json").read_text())
    assert out
    for point in out:
        assert point["grad_norm"] < 1e-8
        assert abs(point["positions"][0][2]) < 1e-6


@pytest.mark.parametrize("sub, name, files", DEMOS)
def test_dry_run_writes_nothing(sub, name, files, tmp_path, capsys):
    assert run_cli(sub, CONFIGS / f"{name}.yaml", tmp_path, "--dry-run") == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == f"{sub}: config valid"
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize("sub, name, files", DEMOS)
def test_outputs_are_reproducible(sub, name, files, tmp_path):
    run_cli(sub, CONFIGS / f"{name}.yaml", tmp_path / "a")
    run_cli(sub, CONFIGS / f"{name}.yaml", tmp_path / "b", "--threads", "2")
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = {"version": 1, "seed": 1, "surface": {"kind": "sphere"}, "vortices": {"count": 3, "gamma": 1.0}}
    path = write_config(tmp_path, cfg)
    run_cli("energy", path, tmp_path / "a")
    run_cli("energy", path, tmp_path / "b", "--seed", "2")
    a = json.loads((tmp_path / "a" / "energy.json").read_text())
    b = json.loads((tmp_path / "b" / "energy.json").read_text())
    assert a["seed"] == 1 and b["seed"] == 2
    assert a["positions"] != b["positions"]


def test_schema_error_names_field(tmp_path, capsys):
    path = write_config(tmp_path, {"version": 1, "surface": {"kind": "klein"}})
    assert run_cli("energy", path, tmp_path) == cli.EXIT_INVALID
    err = capsys.readouterr().err
    assert "surface/kind" in err


@pytest.mark.parametrize(
    "data",
    [
        {"version": 2},
        {"version": 1, "bogus": 3},
        {"version": 1, "surface": {"kind": "torus", "tau": [0.0, -1.0]}},
        {"version": 1, "vortices": {"count": 0}},
    ],
)
def test_invalid_configs_exit_one(data, tmp_path):
    assert run_cli("energy", write_config(tmp_path, data), tmp_path) == cli.EXIT_INVALID


def test_missing_config_exits_one(tmp_path):
    assert run_cli("energy", tmp_path / "absent.yaml", tmp_path) == cli.EXIT_INVALID


def test_unknown_subcommand_exits_one(tmp_path):
    assert cli.run(["teleport", "--config", "x.yaml"]) == cli.EXIT_INVALID


def test_vortex_on_source_exits_two(tmp_path):
    cfg = {
        "version": 1,
        "surface": {"kind": "sphere"},
        "sources": {"alpha": [1.0], "positions": [[0, 0, 1]]},
        "vortices": {"gamma": 1.0, "positions": [[0, 0, 1]]},
    }
    assert run_cli("energy", write_config(tmp_path, cfg), tmp_path) == cli.EXIT_NUMERICAL
    assert not (tmp_path / "energy.json").exists()


def test_atomic_writes_leave_no_temporaries(tmp_path):
    target = tmp_path / "out.json"
    cli.write_atomic(target, "first\n")
    cli.write_atomic(target, "second\n")
    assert target.read_text() == "second\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "vortexeq", "maxn", "--config", str(CONFIGS / "maxn_four.yaml"),
         "--out-dir", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["n_exact"] == 5
