#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
非交换 b-可积系统模块
负责系统的表示、描述文件读写，以及四个定义条件的逐条校验
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import SmoothField
from src.geometry.forms.bforms import BForm
from src.geometry.poisson.bsymplectic import DEFAULT_DET_TOL, BSymplecticStructure, verify_bsymplectic
from src.utils.errors import DescriptorError, LabError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)

# 校验报告中最多列出的失败位置
MAX_LISTED_FAILURES = 5


@dataclass(frozen=True)
class NCBSystem:
    """
    秩为 r 的非交换 b-可积系统 (f_1, ..., f_s)

    Args:
        structure: b-辛结构
        integrals: 积分元组（BFunction 或光滑场），前 r 个为交换部分
        rank: 秩 r
        name: 名称

    r + s = dim 由 verify_system 检查，构造时不强制。
    """

    structure: BSymplecticStructure
    integrals: tuple
    rank: int
    name: str = ""

    def __post_init__(self):
        integrals = tuple(
            f if isinstance(f, BFunction) or not isinstance(f, SmoothField) else BFunction.smooth(f)
            for f in self.integrals
        )
        object.__setattr__(self, "integrals", integrals)
        if not 0 <= self.rank <= len(integrals):
            raise LabError(f"秩 {self.rank} 必须在 [0, s={len(integrals)}] 内")

    @property
    def chart(self):
        return self.structure.chart

    @property
    def s(self):
        return len(self.integrals)

    @property
    def commuting(self):
        return self.integrals[:self.rank]

    @property
    def noncommuting(self):
        return self.integrals[self.rank:]

    @property
    def ell(self):
        """横截辛块的对数 (s - r) / 2"""
        return (self.s - self.rank) // 2

    def hamiltonian_fields(self, count=None):
        count = self.rank if count is None else count
        return [self.structure.hamiltonian_field(f) for f in self.integrals[:count]]

    def values(self, points):
        """
        F(p)，(N, s)；奇异系数非零的积分在 Z 上取 ±inf
        """
        return np.stack([f(self.chart, np.atleast_2d(points)) for f in self.integrals], axis=1)

    def differentials(self, points):
        """b-微分矩阵 (N, s, dim)"""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([f.b_differential_at(self.chart, X) for f in self.integrals], axis=1)

    def with_integrals(self, integrals, name=None):
        return NCBSystem(self.structure, tuple(integrals), self.rank, self.name if name is None else name)

    # ---- 描述文件 ----
    def to_json(self):
        return {
            "name": self.name,
            "chart": self.chart.to_json(),
            "omega": self.structure.omega.to_json(),
            "integrals": [f.to_json() for f in self.integrals],
            "rank": self.rank,
        }

    @classmethod
    def from_json(cls, data):
        """
        读取系统描述 {chart, omega, integrals: [{c, g_expr}], rank}

        Raises:
            DescriptorError: 描述缺项或格式错误
        """
        if not isinstance(data, dict):
            raise DescriptorError("系统描述必须是 JSON 对象")
        missing = [key for key in ("chart", "omega", "integrals", "rank") if key not in data]
        if missing:
            raise DescriptorError(f"系统描述缺少字段: {missing}")
        chart = Chart.from_json(data["chart"])
        omega = BForm.from_json(chart, data["omega"])
        if omega.degree != 2:
            raise DescriptorError("omega 必须是 2 次 b-形式")
        if not isinstance(data["integrals"], list):
            raise DescriptorError("integrals 必须是列表")
        integrals = tuple(BFunction.from_json(item, chart.box) for item in data["integrals"])
        try:
            rank = int(data["rank"])
            return cls(BSymplecticStructure(omega), integrals, rank, str(data.get("name", "")))
        except (TypeError, ValueError, LabError) as e:
            raise DescriptorError(f"系统描述不合法: {e}") from e


def _rank_fraction(matrices, expected_rank, threshold):
    """每个样本的最小奇异值是否超过阈值"""
    if matrices.shape[0] == 0:
        return np.zeros(0, dtype=bool), np.zeros(0)
    if expected_rank == 0:
        return np.ones(matrices.shape[0], dtype=bool), np.full(matrices.shape[0], np.inf)
    singular = np.linalg.svd(matrices, compute_uv=False)
    if singular.shape[1] < expected_rank:
        return np.zeros(matrices.shape[0], dtype=bool), np.zeros(matrices.shape[0])
    smallest = singular[:, expected_rank - 1]
    return smallest > threshold, smallest


def verify_system(system, plan, tolerances=None):
    """
    按定义的四个条件校验系统

    先校验 ω 本身（闭、非退化）；ω 退化时条件 (2)、(4) 无法计算，记为失败并跳过。
    (1) b-微分在 M 的稠密子集和 Z 的稠密子集上线性无关；
    (2) 前 r 个函数与全部函数对合；
    (3) r + s = dim；
    (4) 前 r 个哈密顿向量场作为光滑向量场在 Z 的某点线性无关（报告携带见证点）。

    Args:
        system: NCBSystem
        plan: SamplePlan
        tolerances: 配置中的 tolerances 段

    Returns:
        Report: 各条件结果，不抛出异常
    """
    tol = dict(tolerances or {})
    sv_tol = float(tol.get("rank_singular_value", 1e-8))
    involution_tol = float(tol.get("involution", 1e-8))
    dense_fraction = float(tol.get("dense_fraction", 0.99))
    det_tol = float(tol.get("nondegeneracy_det", DEFAULT_DET_TOL))
    closed_tol = float(tol.get("closedness", 1e-12))

    chart = system.chart
    bulk = plan.bulk_points(chart)
    on_z = plan.z_points(chart)
    report = Report(title=f"verify:{system.name}" if system.name else "verify")
    report.data.update({"rank": system.rank, "s": system.s, "dim": chart.dim})

    precondition = verify_bsymplectic(system.structure.omega, bulk, on_z, det_tol=det_tol, closed_tol=closed_tol)
    nondegenerate = precondition.get("nondegenerate")
    report.add(CheckResult(
        "b_symplectic", nondegenerate.points_tested, precondition.get("closed").max_residual, precondition.passed,
        witness=nondegenerate.witness,
        detail={
            "closed": precondition.get("closed").passed,
            "nondegenerate": nondegenerate.passed,
            "min_relative_det": nondegenerate.max_residual,
            "flags": precondition.data["flags"],
        },
    ))
    degenerate = not nondegenerate.passed

    # (1)
    detail, ok, worst = {}, True, np.inf
    for label, points in (("M", bulk), ("Z", on_z)):
        if points.shape[0] == 0:
            continue
        full, smallest = _rank_fraction(system.differentials(points), system.s, sv_tol)
        fraction = float(np.mean(full))
        detail[f"fraction_{label}"] = fraction
        detail[f"failures_{label}"] = points[~full][:MAX_LISTED_FAILURES].tolist()
        worst = min(worst, float(np.min(smallest)))
        ok = ok and system.s <= chart.dim and fraction >= dense_fraction
    detail["min_singular_value"] = worst
    report.add(CheckResult(
        "condition_1_independence", bulk.shape[0] + on_z.shape[0],
        1.0 - min(detail.get("fraction_M", 1.0), detail.get("fraction_Z", 1.0)), ok, detail=detail,
    ))

    # (2)
    points = np.vstack([bulk, on_z])
    if degenerate:
        report.add(_skipped("condition_2_involution", nondegenerate.witness))
    else:
        report.add(_check_involution(system, points, involution_tol))

    # (3)
    report.add(CheckResult(
        "condition_3_dimension", 0, float(abs(system.rank + system.s - chart.dim)),
        system.rank + system.s == chart.dim,
        detail={"r_plus_s": system.rank + system.s, "dim": chart.dim},
    ))

    # (4)
    if degenerate:
        report.add(_skipped("condition_4_smooth_independence", nondegenerate.witness))
    else:
        report.add(_check_smooth_independence(system, bulk, on_z, sv_tol))

    offenders = [k + system.rank + 1 for k, f in enumerate(system.noncommuting) if not getattr(f, "is_smooth", True)]
    report.data["noncommuting_smooth"] = not offenders
    if offenders:
        report.data["noncommuting_singular"] = offenders

    logger.info("系统 %s 校验%s: %s", system.name, "通过" if report.passed else "未通过",
                report.failed_checks() or "all")
    return report


def _skipped(name, witness):
    return CheckResult(name, 0, float("nan"), False, witness=witness, detail={"skipped": "omega degenerate"})


def _check_involution(system, points, involution_tol):
    residual, witness = 0.0, None
    for i in range(system.rank):
        for j in range(system.s):
            if i == j:
                continue
            values = np.abs(system.structure.bracket_values(system.integrals[i], system.integrals[j], points))
            if values.size and float(np.max(values)) > residual:
                residual = float(np.max(values))
                witness = {"pair": [i + 1, j + 1], "point": points[int(np.argmax(values))].tolist()}
    return CheckResult(
        "condition_2_involution", points.shape[0], residual, residual < involution_tol,
        witness=witness if residual >= involution_tol else None,
    )


def _check_smooth_independence(system, bulk, on_z, sv_tol):
    """条件 (4)：r = 0 时平凡成立；图卡不含 Z 时在区域内寻找见证点"""
    name = "condition_4_smooth_independence"
    if system.rank == 0:
        return CheckResult(name, 0, 0.0, True, detail={"vacuous": True})
    points = on_z if on_z.shape[0] else bulk
    fields = system.hamiltonian_fields()
    smooth = np.stack([field.smooth_components(points) for field in fields], axis=1)
    full, smallest = _rank_fraction(smooth, system.rank, sv_tol)
    detail = {"on_z": bool(on_z.shape[0]), "max_smooth_norm": float(np.max(np.linalg.norm(smooth, axis=2)))}
    if np.any(full):
        k = int(np.argmax(smallest))
        return CheckResult(name, points.shape[0], float(smallest[k]), True,
                           witness=points[k].tolist(), detail=detail)
    # 见证：光滑场在 Z 上的最小奇异值处处不超过阈值
    k = int(np.argmax(smallest))
    detail["reason"] = "Hamiltonian fields nowhere independent as smooth fields on Z"
    return CheckResult(name, points.shape[0], float(smallest[k]), False,
                       witness=points[k].tolist(), detail=detail)
