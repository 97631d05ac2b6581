#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
目标空间括号模块
负责诱导括号表 {f_i, f_j}(p_k) 的采样、F-basic 检验与 Cas-basic 检验
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.utils.errors import FlowError, NondegeneracyError, SystemInconsistencyError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)


@dataclass
class TargetBracketTable:
    """
    诱导括号表

    Args:
        points: (N, dim) 采样点
        values: (N, s, s) {f_i, f_j}(p_k)
        f_basic: (s, s) 每个条目是否只依赖 F 的取值；没有配对时全为 False
        pairs_tested: 参与 F-basic 检验的点对数，为 0 时检验不成立
    """

    points: np.ndarray
    values: np.ndarray
    f_basic: np.ndarray
    pairs_tested: int = 0
    deviations: np.ndarray = field(default=None)

    @property
    def s(self):
        return self.values.shape[1]

    @property
    def conclusive(self):
        return self.pairs_tested > 0

    @property
    def passed(self):
        return self.conclusive and bool(np.all(self.f_basic))

    def antisymmetry_residual(self):
        return float(np.max(np.abs(self.values + np.swapaxes(self.values, 1, 2)))) if self.values.size else 0.0

    def involution_residual(self, rank):
        if rank == 0 or not self.values.size:
            return 0.0
        return float(np.max(np.abs(self.values[:, :rank, :])))

    def to_dict(self):
        return {
            "points": self.points,
            "values": self.values,
            "f_basic": self.f_basic,
            "pairs_tested": self.pairs_tested,
            "conclusive": self.conclusive,
        }


def bracket_values(system, points):
    """
    (N, s, s) 括号值 df_i^T P df_j
    """
    X = np.atleast_2d(points)
    P = system.structure.poisson_matrix(X)
    dF = system.differentials(X)
    return np.einsum("nia,nab,njb->nij", dF, P, dF)


def _fiber_partners(system, points, times, integrator):
    """
    沿交换部分的哈密顿流移动采样点，得到与之 F 值相同的伙伴点
    """
    fields = system.hamiltonian_fields()
    partners, sources = [], []
    for k, point in enumerate(points):
        try:
            partners.append(integrator.joint_flow(fields, point, times[k]))
            sources.append(k)
        except (FlowError, NondegeneracyError) as e:
            logger.debug("跳过第 %d 个点的伙伴: %s", k, e)
    return np.array(partners).reshape(-1, system.chart.dim), np.array(sources, dtype=int)


def induced_target_bracket(system, points, match_tol=1e-9, bracket_tol=1e-6,
                           integrator=None, seed=0, strict=True):
    """
    诱导括号表与 F-basic 检验

    伙伴点由交换部分的联合流生成（这些流保持所有 f_j），
    再用 F 值上的最近邻匹配（容差 match_tol）配对，比较括号值之差 < bracket_tol。

    Args:
        system: 已校验的系统
        points: 采样点（应避开 Z，使 b-函数取值有限）
        match_tol: F 值匹配容差
        bracket_tol: 括号值容差
        integrator: 流积分器
        seed: 随机流时间的种子
        strict: 为 True 时出现非 F-basic 条目即抛出异常（没有点对时只记录，不抛出）

    Returns:
        TargetBracketTable

    Raises:
        SystemInconsistencyError: strict 且有条目不是 F-basic
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    values = bracket_values(system, X)
    s = system.s
    f_basic = np.zeros((s, s), dtype=bool)
    deviations = np.zeros((s, s))
    pairs = 0

    if system.rank > 0 and X.shape[0]:
        integrator = integrator or FlowIntegrator(system.chart)
        rng = np.random.default_rng(seed)
        times = rng.uniform(-0.5, 0.5, size=(X.shape[0], system.rank))
        partners, sources = _fiber_partners(system, X, times, integrator)
        if partners.shape[0]:
            tree = cKDTree(system.values(partners))
            distances, nearest = tree.query(system.values(X[sources]))
            matched = distances < match_tol
            pairs = int(np.sum(matched))
            if pairs:
                partner_values = bracket_values(system, partners[nearest[matched]])
                delta = np.abs(values[sources[matched]] - partner_values)
                deviations = np.max(delta, axis=0)
                f_basic = deviations < bracket_tol

    table = TargetBracketTable(X, values, f_basic, pairs, deviations)
    if not table.conclusive:
        logger.warning("没有匹配到同一纤维上的点对，F-basic 检验不成立")
    elif strict and not np.all(f_basic):
        bad = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(~f_basic))]
        raise SystemInconsistencyError(f"括号表条目 {bad} 不是 F-basic", table=table)
    return table


def is_cas_basic(system, h, points, tol=1e-8):
    """
    h 是否 Cas-basic：{h, f_j} ≈ 0 对所有 j

    Returns:
        Report
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    residuals = [
        float(np.max(np.abs(system.structure.bracket_values(h, f, X)))) if X.shape[0] else 0.0
        for f in system.integrals
    ]
    worst = max(residuals) if residuals else 0.0
    report = Report(title="cas-basic")
    report.add(CheckResult(
        "cas_basic", X.shape[0], worst, worst < tol,
        detail={"per_integral": residuals},
    ))
    return report
