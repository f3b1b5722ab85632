"""Suite runner, report determinism, and the command-line harness."""

import json
import subprocess
import sys

import numpy as np
import pytest

from flowmaplab.reporting import VerificationReport, report_diff
from flowmaplab.suite import CHECKS, ConfigError, convergence_study, load_config, run_suite

SUITE = {
    "name": "mini",
    "seed": 0,
    "rind": 1,
    "stencil_order": 2,
    "time_fractions": [0.0, 0.125, 0.25],
    "flows": [
        {"name": "rigid_rotation", "params": {"omega": 1.0}},
        {"name": "gerstner", "params": {"k": 1.0, "g": 1.0}},
    ],
    "checks": [
        {"id": "cauchy.invariant_drift", "tolerance": 5e-3,
         "options": {"mode": "fd"}, "min_order": 1.8},
    ],
    "grids": [[32, 32], [64, 64]],
}


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "flowmaplab.cli", *args],
        capture_output=True, text=True,
    )
    return proc


class TestConfig:
    def test_schema_rejects_missing_sections(self):
        with pytest.raises(ConfigError):
            load_config({"flows": []})

    def test_schema_rejects_nonpositive_tolerance(self):
        bad = dict(SUITE)
        bad["checks"] = [{"id": "cauchy.invariant_drift", "tolerance": 0.0}]
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_unknown_check_rejected(self):
        bad = dict(SUITE)
        bad["checks"] = [{"id": "nope.nothing", "tolerance": 1.0}]
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_known_checks_documented(self):
        for check_id, (fn, anchor) in CHECKS.items():
            assert "." in check_id and anchor


class TestRunSuite:
    def test_empty_checks_pass(self):
        cfg = dict(SUITE)
        cfg["checks"] = []
        report, code = run_suite(cfg)
        assert code == 0 and report.rows == [] and report.overall_pass

    def test_default_suite_passes_with_order(self):
        report, code = run_suite(SUITE)
        assert code == 0
        assert all(r.passed for r in report.rows)
        orders = [r.order for r in report.rows if r.order is not None]
        assert orders and min(orders) >= 1.8
        # rigid rotation rows sit at the noise floor: no order is attached
        rot_rows = [r for r in report.rows if r.flow == "rigid_rotation"]
        assert all(r.order is None for r in rot_rows)

    def test_forced_failure_exits_one(self):
        cfg = json.loads(json.dumps(SUITE))
        cfg["checks"][0]["tolerance"] = 1e-30
        report, code = run_suite(cfg)
        assert code == 1
        assert report.failing_rows()

    def test_thread_count_does_not_change_hash(self):
        r1, _ = run_suite(SUITE, threads=1)
        r4, _ = run_suite(SUITE, threads=4)
        assert r1.determinism_hash() == r4.determinism_hash()

    def test_report_roundtrip_and_diff(self, tmp_path):
        report, _ = run_suite(SUITE)
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        report.to_json(a)
        report.to_json(b)
        same, text = report_diff(a, b)
        assert same
        loaded = VerificationReport.from_file(a)
        assert loaded.determinism_hash() == report.determinism_hash()

    def test_diff_detects_changes(self, tmp_path):
        report, _ = run_suite(SUITE)
        a = tmp_path / "a.json"
        report.to_json(a)
        data = json.loads(a.read_text())
        data["rows"][0]["linf"] = 999.0
        b = tmp_path / "b.json"
        b.write_text(json.dumps(data))
        same, text = report_diff(a, b)
        assert not same and "999" in text

    def test_csv_rows_written(self, tmp_path):
        report, _ = run_suite(SUITE)
        out = tmp_path / "rows.csv"
        report.to_csv(out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + len(report.rows)
        assert lines[0].startswith("flow,check,anchor")

    def test_rows_carry_anchops_and_verdicts_recomputable(self):
        report, _ = run_suite(SUITE)
        for r in report.rows:
            assert r.anchor
            assert r.passed == (r.linf <= r.tolerance or
                                (r.order is not None and r.passed))


class TestConvergenceStudy:
    def test_stokes_slope_band(self):
        out = convergence_study(
            "circulation.stokes", "rigid_rotation",
            resolutions=[(64, 64), (128, 128), (256, 256)],
            flow_params={"omega": 0.1},
            tolerance=1.0,
        )
        assert 1.8 <= out["order"] <= 2.2, out

    def test_rk4_closure_slope(self):
        period = 2 * np.pi
        out = convergence_study(
            "flows.rk4_closure", "rigid_rotation",
            dts=[period / 64, period / 128, period / 256],
        )
        assert 3.8 <= out["order"] <= 4.2, out

    def test_floor_reported(self):
        out = convergence_study(
            "cauchy.invariant_drift", "rigid_rotation",
            resolutions=[(32, 32), (64, 64)],
        )
        assert out["order"] is None and out["note"] == "n/a (floor)"

    def test_data_file_emitted(self, tmp_path):
        path = tmp_path / "conv.dat"
        convergence_study("flows.rk4_closure", "rigid_rotation",
                          dts=[0.1, 0.05], out_path=path)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("#") and len(lines) == 3


class TestCLI:
    def test_flows_list(self):
        proc = run_cli("flows", "list")
        assert proc.returncode == 0
        assert "gerstner" in proc.stdout and "point_vortex" in proc.stdout

    def test_flows_describe(self):
        proc = run_cli("flows", "describe", "rigid_rotation")
        assert proc.returncode == 0 and "omega" in proc.stdout

    def test_run_pass_and_fail_exit_codes(self, tmp_path):
        cfg = dict(SUITE)
        cfg["grids"] = [[32, 32]]
        cfg.pop("name")
        p = tmp_path / "s.json"
        p.write_text(json.dumps(cfg))
        proc = run_cli("run", str(p), "--out", str(tmp_path / "rep.json"))
        assert proc.returncode == 0, proc.stderr
        assert "determinism hash" in proc.stdout

        cfg["checks"] = [{"id": "cauchy.invariant_drift", "tolerance": 1e-30,
                          "options": {"mode": "fd"}}]
        p.write_text(json.dumps(cfg))
        proc = run_cli("run", str(p), "--out", str(tmp_path / "rep2.json"))
        assert proc.returncode == 1
        assert "failing row" in proc.stderr and "gerstner" in proc.stderr
        assert (tmp_path / "rep2.json").exists()  # report written on failure

    def test_run_invalid_config_exit_two(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"flows": []}))
        assert run_cli("run", str(p)).returncode == 2

    def test_run_unreadable_config_exit_three(self):
        assert run_cli("run", "/nonexistent/suite.json").returncode == 3

    def test_report_diff_cli(self, tmp_path):
        cfg = dict(SUITE)
        cfg["grids"] = [[32, 32]]
        p = tmp_path / "s.json"
        p.write_text(json.dumps(cfg))
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli("run", str(p), "--out", str(a)).returncode == 0
        assert run_cli("run", str(p), "--out", str(b)).returncode == 0
        proc = run_cli("report", "diff", str(a), str(b))
        assert proc.returncode == 0 and "identical" in proc.stdout

    def test_grid_override_flag(self, tmp_path):
        cfg = dict(SUITE)
        p = tmp_path / "s.json"
        p.write_text(json.dumps(cfg))
        proc = run_cli("run", str(p), "--grid", "32x32",
                       "--flow", "rigid_rotation",
                       "--out", str(tmp_path / "r.json"))
        assert proc.returncode == 0
        data = json.loads((tmp_path / "r.json").read_text())
        assert {row["grid"] for row in data["rows"]} == {"32x32"}
        assert {row["flow"] for row in data["rows"]} == {"rigid_rotation"}

    def test_converge_cli(self):
        proc = run_cli("converge", "flows.rk4_closure", "rigid_rotation",
                       "--dts", "0.1,0.05,0.025")
        assert proc.returncode == 0
        assert "fitted order" in proc.stdout


def test_threads_env_var_respected(tmp_path, monkeypatch):
    cfg = dict(SUITE)
    cfg["grids"] = [[32, 32]]
    p = tmp_path / "s.json"
    p.write_text(json.dumps(cfg))
    import os
    env = dict(os.environ, FLOWMAPLAB_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "flowmaplab.cli", "run", str(p),
         "--out", str(tmp_path / "r.json")],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["environment"]["threads"] == 2
