#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行测试：退出码、报告内容、确定性、轨迹 CSV
"""

import json

import numpy as np
import pytest

from src.cli.lab_runner import run
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import Coord, log
from src.geometry.forms.bforms import BForm
from src.geometry.poisson.bsymplectic import BSymplecticStructure
from src.integrable.gallery.gallery import get_entry, standard_model
from src.integrable.systems.nc_system import NCBSystem
from src.utils.config_manager import ConfigManager
from src.utils.reports import load_json, read_csv_trace
from src.utils.run_state import Command, ExitStatus, RunConfig
from src.utils.errors import DescriptorError


def invoke(command, tmp_path, *extra, out="out"):
    argv = [command, "--out", str(tmp_path / out), "--config", str(tmp_path / "missing.json"), *extra]
    return run(argv)


def smooth_area_descriptor(tmp_path):
    """ω = t·(dt/t)∧dz 在 Z 上退化，积分 z"""
    chart = Chart(("t", "z"), t_index=0)
    omega = BForm.from_dict(chart, 2, {(0, 1): Coord(0)})
    system = NCBSystem(BSymplecticStructure(omega), (Coord(1),), 1, "smooth_area")
    path = tmp_path / "smooth_area.json"
    path.write_text(json.dumps(system.to_json()), encoding="utf-8")
    return path


class TestVerify:
    def test_passing_system(self, tmp_path):
        code = invoke("verify", tmp_path, "--gallery", "galilean:b_s1", "--samples", "32")
        assert code == ExitStatus.PASS.value
        report = load_json(tmp_path / "out" / "verify_galilean_b_s1.json")
        assert report["schema"] == 1
        assert report["pass"] is True
        assert (tmp_path / "out" / "verify_galilean_b_s1.meta.json").exists()

    def test_counterexample_names_condition_4(self, tmp_path):
        code = invoke("verify", tmp_path, "--gallery", "counterexample_2d", "--samples", "32")
        assert code == ExitStatus.FAILURE.value
        report = load_json(tmp_path / "out" / "verify_counterexample_2d.json")
        failed = [check["check"] for check in report["checks"] if not check["pass"]]
        assert failed == ["condition_4_smooth_independence"]

    def test_descriptor_file(self, tmp_path):
        path = tmp_path / "b_s1.json"
        path.write_text(json.dumps(get_entry("galilean:b_s1").to_json()), encoding="utf-8")
        assert invoke("verify", tmp_path, "--file", str(path), "--samples", "32") == ExitStatus.PASS.value
        assert (tmp_path / "out" / "verify_b_s1.json").exists()

    @pytest.mark.parametrize("content", ["{not json", json.dumps({"chart": {}}), json.dumps([1, 2])])
    def test_malformed_descriptor(self, tmp_path, content):
        path = tmp_path / "broken.json"
        path.write_text(content, encoding="utf-8")
        assert invoke("verify", tmp_path, "--file", str(path)) == ExitStatus.PARSE_ERROR.value

    def test_degenerate_form_fails_cleanly(self, tmp_path):
        path = smooth_area_descriptor(tmp_path)
        assert invoke("verify", tmp_path, "--file", str(path), "--samples", "16") == ExitStatus.FAILURE.value
        report = load_json(tmp_path / "out" / "verify_smooth_area.json")
        failed = [check["check"] for check in report["checks"] if not check["pass"]]
        assert failed[0] == "b_symplectic"
        assert "condition_2_involution" in failed

    def test_uncertified_log_is_parse_error(self, tmp_path):
        base = standard_model(1, 3, 1.0).system
        bad = base.with_integrals(base.integrals[:2] + (log(Coord(base.chart.index("p1"))),))
        path = tmp_path / "bad_log.json"
        path.write_text(json.dumps(bad.to_json()), encoding="utf-8")
        assert invoke("verify", tmp_path, "--file", str(path)) == ExitStatus.PARSE_ERROR.value

    def test_target_bracket_summary(self, tmp_path):
        invoke("verify", tmp_path, "--gallery", "standard_model:1,3,1", "--samples", "32")
        report = load_json(tmp_path / "out" / "verify_standard_model_1_3_1.json")
        summary = report["data"]["target_bracket"]
        assert summary["conclusive"] is True
        assert summary["pairs_tested"] > 0

    def test_out_defaults_to_configured_directory(self, tmp_path):
        config = tmp_path / "lab.json"
        config.write_text(json.dumps({"output": {"directory": str(tmp_path / "configured")}}), encoding="utf-8")
        code = run(["verify", "--gallery", "galilean:b_s1", "--samples", "16", "--config", str(config)])
        assert code == ExitStatus.PASS.value
        assert (tmp_path / "configured" / "verify_galilean_b_s1.json").exists()

    def test_unknown_gallery_entry(self, tmp_path):
        assert invoke("verify", tmp_path, "--gallery", "no_such_entry") == ExitStatus.PARSE_ERROR.value

    def test_deterministic_report(self, tmp_path):
        args = ("--gallery", "twisted_lift:2", "--samples", "32", "--seed", "3")
        invoke("verify", tmp_path, *args, out="first")
        invoke("verify", tmp_path, *args, out="second")
        first = (tmp_path / "first" / "verify_twisted_lift_2.json").read_bytes()
        second = (tmp_path / "second" / "verify_twisted_lift_2.json").read_bytes()
        assert first == second

    def test_argument_errors_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            invoke("verify", tmp_path)
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            invoke("verify", tmp_path, "--gallery", "galilean:b_s1", "--tol", "-1")
        assert info.value.code == 2


class TestActionAngle:
    def test_modular_period(self, tmp_path):
        code = invoke("action-angle", tmp_path, "--gallery", "standard_model:1,1,2", "--samples", "16")
        assert code == ExitStatus.PASS.value
        report = load_json(tmp_path / "out" / "action_angle_standard_model_1_1_2.json")
        assert abs(report["modular_period"] - 2.0) < 1e-6
        chart = load_json(tmp_path / "out" / "action_angle_chart_standard_model_1_1_2.json")
        assert chart["target_names"] == ["theta1", "t"]

    def test_degenerate_form_stops_at_verify(self, tmp_path):
        path = smooth_area_descriptor(tmp_path)
        code = invoke("action-angle", tmp_path, "--file", str(path), "--samples", "16")
        assert code == ExitStatus.FAILURE.value
        report = load_json(tmp_path / "out" / "action_angle_smooth_area.json")
        assert report["stage"] == "verify"

    def test_unverified_system_stops_early(self, tmp_path):
        code = invoke("action-angle", tmp_path, "--gallery", "counterexample_2d", "--samples", "16")
        assert code == ExitStatus.FAILURE.value
        report = load_json(tmp_path / "out" / "action_angle_counterexample_2d.json")
        assert report["pass"] is False
        assert report["stage"] == "verify"


class TestTrace:
    def test_stays_on_z(self, tmp_path):
        code = invoke("trace", tmp_path, "--gallery", "standard_model:1,1,2", "--point", "0.5,0.0", "--time", "1.0")
        assert code == ExitStatus.PASS.value
        names, times, points = read_csv_trace(tmp_path / "out" / "trace_f1_standard_model_1_1_2.csv")
        assert names == ["theta1", "t"]
        assert times[0] == 0.0 and times[-1] == pytest.approx(1.0)
        assert np.max(np.abs(points[:, 1])) < 1e-10

    def test_closes_after_one_period(self, tmp_path):
        invoke("trace", tmp_path, "--gallery", "standard_model:1,1,2", "--point", "0.5,0.3", "--time", "2.0")
        _, _, points = read_csv_trace(tmp_path / "out" / "trace_f1_standard_model_1_1_2.csv")
        assert np.allclose(points[-1], points[0], atol=1e-8)
        # 中途经过 θ = 0 的另一侧
        assert np.max(np.abs(points[:, 0] - 0.5)) > 0.4

    def test_zero_time_single_row(self, tmp_path):
        invoke("trace", tmp_path, "--gallery", "standard_model:1,1,2", "--point", "0.5,0.3", "--time", "0")
        _, times, points = read_csv_trace(tmp_path / "out" / "trace_f1_standard_model_1_1_2.csv")
        assert times.tolist() == [0.0]
        assert np.allclose(points[0], [0.5, 0.3])

    def test_wrong_point_dimension(self, tmp_path):
        code = invoke("trace", tmp_path, "--gallery", "standard_model:1,1,2", "--point", "0.5")
        assert code == ExitStatus.PARSE_ERROR.value

    def test_integral_out_of_range(self, tmp_path):
        code = invoke("trace", tmp_path, "--gallery", "standard_model:1,1,2", "--integrals", "3")
        assert code == ExitStatus.PARSE_ERROR.value

    def test_failing_system(self, tmp_path):
        code = invoke("trace", tmp_path, "--gallery", "counterexample_2d", "--samples", "16")
        assert code == ExitStatus.FAILURE.value

    def test_degenerate_form(self, tmp_path):
        path = smooth_area_descriptor(tmp_path)
        code = invoke("trace", tmp_path, "--file", str(path), "--samples", "16", "--point", "0.5,0.1")
        assert code == ExitStatus.FAILURE.value


class TestRunConfig:
    def test_stem_from_file(self):
        config = RunConfig(Command.VERIFY, file="/data/my system.json")
        assert config.stem == "my_system"
        assert config.source == "file:/data/my system.json"

    def test_both_sources_rejected(self):
        with pytest.raises(DescriptorError):
            RunConfig("verify", gallery="a", file="b")

    def test_unknown_command(self):
        with pytest.raises(DescriptorError):
            RunConfig("explode", gallery="a")

    def test_debug_mode_forces_debug_level(self, tmp_path):
        path = tmp_path / "lab.json"
        path.write_text(json.dumps({"system": {"debug_mode": True, "log_level": "WARNING"}}), encoding="utf-8")
        manager = ConfigManager(str(path))
        manager.load_config()
        assert manager.get_log_level() == "DEBUG"
        manager.update_config("system", "debug_mode", False)
        assert manager.get_log_level() == "WARNING"

    def test_to_dict(self):
        data = RunConfig("trace", gallery="galilean:b_s1", integrals=[1, 2]).to_dict()
        assert data["command"] == "trace"
        assert data["integrals"] == (1, 2)
