#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
作用-角流水线模块
负责依次执行 正规形 -> 周期格 -> 一致化 -> 作用坐标 -> 角坐标 -> 正规形校验，
任一阶段失败时抛出带阶段名的 PipelineError
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field

from src.geometry.chart.expressions import Coord
from src.integrable.action_angle.action_angle import (
    ActionAngleChart,
    action_coordinates,
    angle_coordinates,
    verify_normal_form,
)
from src.integrable.action_angle.homotopy import HomotopyOperator
from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.integrable.dynamics.period_lattice import PeriodLatticeFinder
from src.integrable.dynamics.uniformization import LatticeField, uniformize
from src.integrable.systems.layout import StandardModelLayout
from src.integrable.systems.normal_form import normal_form
from src.utils.errors import LabError, PipelineError

logger = logging.getLogger(__name__)


@dataclass
class ActionAngleResult:
    """流水线产物"""

    system: object
    normal_form: object
    lattice: object
    flows: object
    actions: object
    chart: ActionAngleChart
    reports: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(report.passed for report in self.reports.values())

    @property
    def modular_period(self):
        return self.lattice.modular_period


@contextmanager
def _stage(name):
    logger.info("▶ 阶段 %s", name)
    try:
        yield
    except PipelineError:
        raise
    except LabError as e:
        logger.error("阶段 %s 失败: %s", name, e)
        raise PipelineError(name, str(e)) from e


def construct_action_angle(system, config, plan, samples=None, section=None):
    """
    构造作用-角图卡

    Args:
        system: 已通过校验的系统
        config: ConfigManager
        plan: SamplePlan（校验采样点）
        samples: 正规形校验的采样点数（缺省取配置 action_angle.verify_samples）
        section: 角坐标的截面（作用在正规形系统的图卡上，缺省为 FlatSection）

    Returns:
        ActionAngleResult

    Raises:
        PipelineError: 某阶段失败，携带阶段名
    """
    aa_config = config.get_action_angle_config()
    lattice_config = config.get_lattice_config()
    tolerances = config.get_tolerances()
    cas_tol = float(tolerances.get("cas_basic", 1e-6))
    samples = int(samples or aa_config.get("verify_samples", 16))
    reports = {}

    with _stage("normal_form"):
        normalized = normal_form(system)
        sys = normalized.system
        structure = sys.structure
        layout = StandardModelLayout.detect(sys)

    integrator = FlowIntegrator.from_config(sys.chart, config.get_flow_config())
    points = plan.bulk_points(sys.chart, avoid_z=True)[:samples]

    with _stage("period_lattice"):
        finder = PeriodLatticeFinder.from_config(integrator, lattice_config)
        lattice = LatticeField(
            sys, layout, finder,
            grid_points=int(lattice_config.get("grid_points", 5)),
            grid_margin=float(lattice_config.get("grid_margin", 0.1)),
        ).build()

    with _stage("uniformize"):
        flows = uniformize(structure, sys, lattice)
        reports["uniformize"] = flows.verify(integrator, points[:10], points, {"cas": cas_tol})

    with _stage("action_coordinates"):
        actions = action_coordinates(structure, sys, flows, lattice, HomotopyOperator.from_config(aa_config))
        reports["action_coordinates"] = actions.verify(points, cas_tol=cas_tol)

    with _stage("angle_coordinates"):
        angles = angle_coordinates(structure, sys, flows, integrator, aa_config, layout, section)
        chart = ActionAngleChart(
            structure, actions.c, angles, Coord(sys.chart.t_index), actions.fields,
            [sys.integrals[k] for k in range(sys.rank, sys.s)], flows,
        )

    with _stage("verify_normal_form"):
        reports["normal_form"] = verify_normal_form(
            structure, chart, points,
            tol=float(tolerances.get("normal_form_deviation", 1e-5)), system=sys, integrator=integrator,
        )

    logger.info("作用-角流水线完成: c = %.10g", actions.c)
    return ActionAngleResult(sys, normalized, lattice, flows, actions, chart, reports)
