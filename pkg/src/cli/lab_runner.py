#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行模块
负责 verify / action-angle / trace 三个子命令：读取或选取系统、运行校验与构造流水线、
写出 JSON 报告与 CSV 轨迹

退出码：0 全部通过，1 校验或流水线失败，2 输入无法解析
"""

import argparse
import json
import logging
import os

import numpy as np

from src.integrable.action_angle.pipeline import construct_action_angle
from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.integrable.gallery.gallery import get_entry
from src.integrable.systems.nc_system import NCBSystem, verify_system
from src.integrable.systems.target_bracket import induced_target_bracket
from src.utils.config_manager import ConfigManager
from src.utils.errors import DescriptorError, DomainExitError, GalleryError, LabError, PipelineError
from src.utils.logger import setup_logging
from src.utils.reports import CheckResult, Report, load_json, write_csv_trace, write_json_report
from src.utils.run_state import Command, ExitStatus, RunConfig
from src.utils.sampling import SamplePlan

logger = logging.getLogger(__name__)

# 括号表 F-basic 检验所用的采样点数
TARGET_BRACKET_POINTS = 16


class ParseFailure(Exception):
    """系统来源无法解析"""


def _parse_point(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--point 需要逗号分隔的数值: {text!r}") from e


def _parse_integrals(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--integrals 需要逗号分隔的整数: {text!r}") from e


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blab", description="非交换 b-可积系统计算实验室",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(cmd):
        source = cmd.add_mutually_exclusive_group(required=True)
        source.add_argument("--gallery", type=str, help="示例库条目名，如 galilean:b_s1")
        source.add_argument("--file", type=str, help="系统描述 JSON 文件")
        cmd.add_argument("--samples", type=int, default=None, help="区域内部采样点数")
        cmd.add_argument("--tol", type=float, default=None, help="本命令的主容差")
        cmd.add_argument("--seed", type=int, default=None, help="采样种子")
        cmd.add_argument("--out", type=str, default=None, help="输出目录（缺省取配置 output.directory）")
        cmd.add_argument("--config", type=str, default=None, help="配置文件路径")

    common(sub.add_parser(Command.VERIFY.value, help="校验定义的四个条件"))
    common(sub.add_parser(Command.ACTION_ANGLE.value, help="构造作用-角图卡并校验正规形"))
    trace = sub.add_parser(Command.TRACE.value, help="输出积分哈密顿流的 CSV 轨迹")
    common(trace)
    trace.add_argument("--time", type=float, default=1.0, help="模拟时间")
    trace.add_argument("--point", type=_parse_point, default=None, help="初始点，逗号分隔")
    trace.add_argument("--integrals", type=_parse_integrals, default=(), help="积分编号（从 1 开始），逗号分隔")
    return parser


def parse_run_config(argv=None):
    """
    解析命令行参数

    Raises:
        SystemExit: 参数无法解析（退出码 2）
    """
    args = build_parser().parse_args(argv)
    try:
        return RunConfig(
            command=args.command,
            gallery=args.gallery,
            file=args.file,
            samples=args.samples,
            tol=args.tol,
            seed=args.seed if args.seed is not None else 0,
            out=args.out,
            time=getattr(args, "time", 1.0),
            point=getattr(args, "point", None),
            integrals=getattr(args, "integrals", ()),
            config_file=args.config,
            extra={"seed_given": args.seed is not None},
        )
    except DescriptorError as e:
        build_parser().error(str(e))


# ---------------------------------------------------------------------------
# 公共步骤
# ---------------------------------------------------------------------------
def _load_settings(config):
    """配置文件 + 命令行覆盖，返回 (ConfigManager, SamplePlan)"""
    manager = ConfigManager(config.config_file)
    manager.load_config()
    sampling = manager.get_sampling_config()
    if config.samples is not None:
        sampling["bulk_samples"] = config.samples
    if config.extra.get("seed_given", True):
        sampling["seed"] = config.seed
    if config.out is None:
        config.out = manager.get_section("output").get("directory", "output")
    return manager, SamplePlan.from_config(sampling)


def load_system(config, tolerances=None):
    """
    按来源取系统，非退化阈值取 tolerances.nondegeneracy_det

    Raises:
        ParseFailure: 条目名未知或描述文件不合法
    """
    try:
        if config.gallery is not None:
            system = get_entry(config.gallery).system
        else:
            system = NCBSystem.from_json(load_json(config.file))
    except (GalleryError, DescriptorError, LabError, OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ParseFailure(f"无法读取系统 {config.source}: {e}") from e
    if tolerances and "nondegeneracy_det" in tolerances:
        system.structure.det_tol = float(tolerances["nondegeneracy_det"])
    return system


def _verify(system, plan, manager):
    """verify_system；数值错误记为一项失败的检查"""
    try:
        return verify_system(system, plan, manager.get_tolerances())
    except LabError as e:
        logger.error("校验中断: %s", e)
        report = Report(title=f"verify:{system.name}" if system.name else "verify")
        report.add(CheckResult("verify_aborted", 0, float("nan"), False, detail={"error": str(e)}))
        return report


def _target_bracket(system, plan, manager):
    """括号表的 F-basic 摘要，写入 verify 报告的 data"""
    tol = manager.get_tolerances()
    points = plan.bulk_points(system.chart, avoid_z=True)[:TARGET_BRACKET_POINTS]
    try:
        table = induced_target_bracket(
            system, points,
            match_tol=float(tol.get("f_basic_match", 1e-9)),
            bracket_tol=float(tol.get("f_basic_bracket", 1e-6)),
            integrator=FlowIntegrator.from_config(system.chart, manager.get_flow_config()),
            strict=False,
        )
    except LabError as e:
        logger.warning("括号表计算失败: %s", e)
        return {"error": str(e)}
    return {"pairs_tested": table.pairs_tested, "conclusive": table.conclusive, "f_basic": table.f_basic}


def _report_path(config, kind, suffix=".json"):
    return os.path.join(config.out, f"{kind}_{config.stem}{suffix}")


def _metadata(config):
    return {"run_config": config.to_dict()}


# ---------------------------------------------------------------------------
# 子命令
# ---------------------------------------------------------------------------
def cmd_verify(config):
    """
    校验系统并写出 JSON 报告

    Returns:
        int: 0 四个条件全部通过，1 有条件失败，2 输入无法解析
    """
    try:
        manager, plan = _load_settings(config)
        system = load_system(config, manager.get_tolerances())
    except (ParseFailure, DescriptorError) as e:
        logger.error("%s", e)
        return ExitStatus.PARSE_ERROR.value
    if config.tol is not None:
        manager.update_config("tolerances", "involution", config.tol)

    report = _verify(system, plan, manager)
    report.data["source"] = config.source
    if report.passed and system.rank > 0:
        report.data["target_bracket"] = _target_bracket(system, plan, manager)
    write_json_report(_report_path(config, "verify"), report, _metadata(config))
    if not report.passed:
        logger.warning("未通过的条件: %s", ", ".join(report.failed_checks()))
        return ExitStatus.FAILURE.value
    return ExitStatus.PASS.value


def cmd_action_angle(config):
    """
    运行作用-角流水线，写出图卡与校验报告

    Returns:
        int: 0 正规形偏差低于容差，1 校验或某阶段失败，2 输入无法解析
    """
    try:
        manager, plan = _load_settings(config)
        system = load_system(config, manager.get_tolerances())
    except (ParseFailure, DescriptorError) as e:
        logger.error("%s", e)
        return ExitStatus.PARSE_ERROR.value
    if config.tol is not None:
        manager.update_config("tolerances", "normal_form_deviation", config.tol)

    verification = _verify(system, plan, manager)
    path = _report_path(config, "action_angle")
    if not verification.passed:
        logger.error("系统未通过校验，不进入流水线: %s", verification.failed_checks())
        write_json_report(path, {"pass": False, "stage": "verify", "verify": verification}, _metadata(config))
        return ExitStatus.FAILURE.value

    try:
        result = construct_action_angle(system, manager, plan)
    except PipelineError as e:
        write_json_report(path, {"pass": False, "stage": e.stage, "error": str(e)}, _metadata(config))
        return ExitStatus.FAILURE.value
    except LabError as e:
        logger.error("流水线失败: %s", e)
        write_json_report(path, {"pass": False, "stage": "action_angle", "error": str(e)}, _metadata(config))
        return ExitStatus.FAILURE.value

    deviation = result.reports["normal_form"].get("normal_form_deviation")
    payload = {
        "pass": bool(deviation.passed),
        "modular_period": result.modular_period,
        "c": result.actions.c,
        "lattice": result.lattice.to_dict(),
        "reports": {name: report.to_dict() for name, report in result.reports.items()},
    }
    write_json_report(path, payload, _metadata(config))

    sample = plan.bulk_points(result.system.chart, avoid_z=True)
    try:
        write_json_report(_report_path(config, "action_angle_chart"), result.chart.export(sample), _metadata(config))
    except LabError as e:
        logger.error("图卡导出失败: %s", e)
        return ExitStatus.FAILURE.value
    logger.info("模周期 c = %.10g，正规形偏差 %.3g", result.modular_period, deviation.max_residual)
    return ExitStatus.PASS.value if deviation.passed else ExitStatus.FAILURE.value


def cmd_trace(config):
    """
    对每个选定的积分输出一条 CSV 轨迹（第一列为模拟时间，其后为坐标，周期坐标折回 [0, 1)）

    Returns:
        int: 0 全部写出，1 系统未通过校验或轨道离开区域，2 输入无法解析
    """
    try:
        manager, plan = _load_settings(config)
        system = load_system(config, manager.get_tolerances())
    except (ParseFailure, DescriptorError) as e:
        logger.error("%s", e)
        return ExitStatus.PARSE_ERROR.value

    chart = system.chart
    if config.point is not None and len(config.point) != chart.dim:
        logger.error("--point 有 %d 个分量，图卡维数为 %d", len(config.point), chart.dim)
        return ExitStatus.PARSE_ERROR.value
    indices = config.integrals or tuple(range(1, max(system.rank, 1) + 1))
    if min(indices) < 1 or max(indices) > system.s:
        logger.error("积分编号 %s 超出 [1, s = %d]", list(indices), system.s)
        return ExitStatus.PARSE_ERROR.value

    verification = _verify(system, plan, manager)
    if not verification.passed:
        logger.error("系统未通过校验: %s", verification.failed_checks())
        return ExitStatus.FAILURE.value

    point = np.array(config.point) if config.point is not None else plan.bulk_points(chart, avoid_z=True)[0]
    integrator = FlowIntegrator.from_config(chart, manager.get_flow_config())
    steps = int(manager.get_section("output").get("trace_steps", 200))
    status = ExitStatus.PASS
    for k in indices:
        t_eval = np.linspace(0.0, config.time, steps + 1) if config.time != 0.0 else None
        try:
            field = system.structure.hamiltonian_field(system.integrals[k - 1])
            trajectory = integrator.integrate(field, point, config.time, t_eval=t_eval)
        except DomainExitError as e:
            logger.error("f_%d 的轨道离开区域，最后有效状态 %s (t_sim = %s)", k, e.last_state, e.last_time)
            status = ExitStatus.FAILURE
            continue
        except LabError as e:
            logger.error("f_%d 的轨道积分失败: %s", k, e)
            status = ExitStatus.FAILURE
            continue
        path = _report_path(config, f"trace_f{k}", ".csv")
        write_csv_trace(path, trajectory.times, chart.wrap(trajectory.points), chart.names)
        logger.info("轨迹已写出: %s (%d 行)", path, trajectory.times.shape[0])
    return status.value


COMMANDS = {
    Command.VERIFY: cmd_verify,
    Command.ACTION_ANGLE: cmd_action_angle,
    Command.TRACE: cmd_trace,
}


def run(argv=None):
    """
    命令行入口

    Returns:
        int: 退出码
    """
    config = parse_run_config(argv)
    manager = ConfigManager(config.config_file)
    try:
        manager.load_config()
    except DescriptorError as e:
        setup_logging("INFO")
        logger.error("%s", e)
        return ExitStatus.PARSE_ERROR.value
    setup_logging(manager.get_log_level())
    return COMMANDS[config.command](config)
