#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Darboux-Carathéodory 图卡模块
负责在 Z 上一点附近把交换函数 f_1..f_k 补全为 b-辛坐标：
流盒构造共轭坐标 g_i，辛 Gram-Schmidt 构造横截线性坐标 (q_1, p_2, q_2, ...)
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import Coord, add, const, mul
from src.geometry.chart.fields import as_points, b_shifted
from src.geometry.forms.bforms import BForm
from src.geometry.poisson.bsymplectic import BSymplecticStructure
from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.utils.errors import DarbouxError, DependenceError, NonCommutingError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)


def _pair(P, u, v):
    """<u, v> = u^T P v（b-余切向量的泊松配对）"""
    return float(u @ P @ v)


def _project_out(P, v, pairs):
    """对每个满足 <a, b> = 1 的辛对 (a, b)：v - <v, b> a + <v, a> b"""
    for a, b in pairs:
        v = v - _pair(P, v, b) * a + _pair(P, v, a) * b
    return v


def _linear_field(chart, covector, center):
    """w·(x - x_m)，w 按槽位给出且 w_0 = 0"""
    terms = []
    for slot in range(1, chart.dim):
        weight = float(covector[slot])
        if abs(weight) > 1e-14:
            coord = chart.slot_coords[slot]
            terms.append(mul(weight, add(Coord(coord), const(-float(center[coord])))))
    return add(*terms)


@dataclass
class DarbouxChart:
    """
    (f_1..f_k, g_1..g_k, t, q_1, p_2, q_2, ...) 局部图卡

    Args:
        structure: 源 b-辛结构
        center: Z 上的中心点 m
        functions: f_1..f_k
        gamma: (k, dim) 流盒横截超平面的余切向量（槽位顺序）
        transverse: [q_1, p_2, q_2, ...] 线性光滑场
        integrator: 流积分器
    """

    structure: BSymplecticStructure
    center: np.ndarray
    functions: list
    gamma: np.ndarray
    transverse: list
    integrator: FlowIntegrator
    newton_tol: float = 1e-13
    max_newton: int = 20
    fd_step: float = 1e-6

    def __post_init__(self):
        chart = self.structure.chart
        self.k = len(self.functions)
        self.fields = [self.structure.hamiltonian_field(f) for f in self.functions]
        self._gamma_coords = np.zeros((self.k, chart.dim))
        for slot in range(1, chart.dim):
            self._gamma_coords[:, chart.slot_coords[slot]] = self.gamma[:, slot]
        self.target = BSymplecticStructure(self.target_form())
        self._target_matrix = self.target.matrix(np.zeros((1, chart.dim)))[0]

    @property
    def chart(self):
        return self.structure.chart

    def target_form(self):
        """Σ df_i∧dg_i + dt/t∧dq_1 + Σ dp_j∧dq_j"""
        k, dim = self.k, self.chart.dim
        names = [f"f{i}" for i in range(1, k + 1)] + [f"g{i}" for i in range(1, k + 1)] + ["t", "q1"]
        for j in range(2, (dim - 2 * k) // 2 + 1):
            names += [f"p{j}", f"q{j}"]
        chart = Chart(tuple(names), t_index=2 * k)
        slot = {name: chart.coord_slots[i] for i, name in enumerate(names)}
        terms = {(slot[f"f{i}"], slot[f"g{i}"]): 1.0 for i in range(1, k + 1)}
        terms[(0, slot["q1"])] = 1.0
        for j in range(2, (dim - 2 * k) // 2 + 1):
            terms[(slot[f"p{j}"], slot[f"q{j}"])] = 1.0
        return BForm.from_dict(chart, 2, terms)

    def conjugates(self, points, initial=None):
        """
        g(x)：τ 使 Φ^{-τ}(x) 落在超平面 γ·(y - m) = 0 上（批量 Newton），(N, k)
        """
        X, _ = as_points(points)
        if self.k == 0:
            return np.zeros((X.shape[0], 0))
        chart = self.chart
        Gamma = self._gamma_coords
        tau = chart.difference(X, self.center) @ Gamma.T if initial is None else np.array(initial, dtype=float)
        for _ in range(self.max_newton):
            y = self.integrator.joint_flow_batch(self.fields, X, -tau)
            residual = chart.difference(y, self.center) @ Gamma.T
            if float(np.max(np.abs(residual))) < self.newton_tol:
                break
            # ∂y/∂τ_j = -X_j(y)
            V = np.stack([f.smooth_components(y) for f in self.fields], axis=2)
            J = -np.einsum("kd,ndj->nkj", Gamma, V)
            tau = tau - np.linalg.solve(J, residual[..., None])[..., 0]
        return tau

    def map(self, points):
        X, _ = as_points(points)
        chart = self.chart
        columns = [np.stack([f.value(chart, X) for f in self.functions], axis=1) if self.k else np.zeros((X.shape[0], 0)),
                   self.conjugates(X), X[:, [chart.t_index]]]
        columns += [w.evaluate(X)[:, None] for w in self.transverse]
        return np.hstack(columns)

    def b_jacobian(self, points):
        """
        目标槽位顺序 (dt/t, df.., dg.., dq_1, dp_2, dq_2, ..) 的 b-Jacobi 矩阵
        """
        X, _ = as_points(points)
        chart = self.chart
        dim = chart.dim
        t_row = np.zeros((X.shape[0], 1, dim))
        t_row[:, 0, 0] = 1.0
        rows = [t_row]
        if self.k:
            rows.append(np.stack([f.b_differential_at(chart, X) for f in self.functions], axis=1))
            base = self.conjugates(X)
            columns = []
            for slot in range(dim):
                plus, minus = b_shifted(chart, X, slot, self.fd_step)
                columns.append((self.conjugates(plus, base) - self.conjugates(minus, base)) / (2.0 * self.fd_step))
            rows.append(np.stack(columns, axis=2))
        rows += [w.b_differential_at(chart, X)[:, None, :] for w in self.transverse]
        return np.concatenate(rows, axis=1)

    def pullback(self, points):
        J = self.b_jacobian(points)
        return np.einsum("nai,ab,nbj->nij", J, self._target_matrix, J)


def _conjugate_covectors(P, dF, e0, tol):
    """
    γ_i：<df_j, γ_i> = δ_ij，<e0, γ_i> = 0，γ_i 的 dt/t 分量为 0，<γ_l, γ_i> = 0
    """
    k, dim = dF.shape
    if k == 0:
        return np.zeros((0, dim))
    slot0 = np.zeros(dim)
    slot0[0] = 1.0
    A = np.vstack([dF @ P, e0 @ P, slot0])
    rhs = np.vstack([np.eye(k), np.zeros((2, k))])
    solution, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    gamma = solution.T
    if float(np.max(np.abs(A @ solution - rhs))) > tol:
        raise DependenceError("无法构造共轭余切向量：df_i 与 dt/t 在中心点线性相关")
    C = gamma @ P @ gamma.T
    return gamma - 0.5 * C @ dF


def darboux_caratheodory_chart(structure, functions, center, integrator=None, samples=100,
                               radius=0.05, tol=1e-5, commute_tol=1e-8, seed=0):
    """
    在 Z 上一点附近构造 Darboux-Carathéodory 图卡并校验

    Args:
        structure: b-辛结构
        functions: 两两交换的 f_1..f_k（可为空）
        center: Z 上的点 m
        integrator: 流积分器
        samples: 校验采样点数
        radius: 采样半径
        tol: 形式偏差容差

    Returns:
        tuple: (DarbouxChart, Report)

    Raises:
        DependenceError: df_i 在 m 处相关，或与 log|t| 不交换
        NonCommutingError: f_i 之间不交换
    """
    chart = structure.chart
    m = np.asarray(center, dtype=float)
    if chart.t_index is None or abs(m[chart.t_index]) > 1e-12:
        raise DarbouxError("中心点必须在 Z 上")
    m = m.copy()
    m[chart.t_index] = 0.0
    functions = list(functions)
    k, dim = len(functions), chart.dim
    if 2 * k + 2 > dim:
        raise DependenceError(f"k = {k} 个函数超过维数 {dim} 允许的上限")

    P = structure.poisson_matrix(m[None, :])[0]
    dF = np.array([f.b_differential_at(chart, m[None, :])[0] for f in functions]).reshape(k, dim)
    e0 = np.zeros(dim)
    e0[0] = 1.0
    if k and np.linalg.matrix_rank(np.vstack([dF, e0]), tol=1e-10) < k + 1:
        raise DependenceError("df_1..df_k 与 dt/t 在中心点线性相关")
    brackets = dF @ P @ dF.T
    if k and float(np.max(np.abs(brackets))) > commute_tol:
        raise NonCommutingError(f"输入函数不交换：max |{{f_i, f_j}}(m)| = {float(np.max(np.abs(brackets))):.3g}")
    if k and float(np.max(np.abs(dF @ P @ e0))) > commute_tol:
        raise DependenceError("输入函数在中心点与 log|t| 不交换，t 无法作为补全坐标")

    gamma = _conjugate_covectors(P, dF, e0, 1e-9)
    pairs = [(dF[i], gamma[i]) for i in range(k)]

    # q_1 = P^{-1} e0 投影到 df, γ 的辛补，<e0, q_1> = 1 且 dt/t 分量为 0
    q1 = _project_out(P, np.linalg.solve(P, e0), pairs)
    q1[0] = 0.0
    pairs.append((e0, q1))

    candidates = [_project_out(P, np.eye(dim)[slot], pairs) for slot in range(1, dim)]
    transverse_pairs = []
    while len(transverse_pairs) < (dim - 2 * k - 2) // 2:
        candidates = [v for v in candidates if np.linalg.norm(v) > 1e-10]
        if not candidates:
            raise DependenceError("辛 Gram-Schmidt 提前耗尽")
        p = candidates.pop(0)
        scores = [abs(_pair(P, p, v)) for v in candidates]
        if not scores or max(scores) < 1e-10:
            continue
        q = candidates.pop(int(np.argmax(scores)))
        q = q / _pair(P, p, q)
        p[0] = q[0] = 0.0
        transverse_pairs.append((p, q))
        candidates = [_project_out(P, v, [(p, q)]) for v in candidates]

    transverse = [_linear_field(chart, q1, m)]
    for p, q in transverse_pairs:
        transverse += [_linear_field(chart, p, m), _linear_field(chart, q, m)]

    result = DarbouxChart(structure, m, functions, gamma, transverse, integrator or FlowIntegrator(chart))
    report = verify_darboux_chart(result, samples=samples, radius=radius, tol=tol, seed=seed)
    return result, report


def verify_darboux_chart(darboux, samples=100, radius=0.05, tol=1e-5, seed=0):
    """
    在中心点附近采样，比较 ω 与 Σ df_i∧dg_i + dt/t∧dq_1 + Σ dp_j∧dq_j 的拉回

    Returns:
        Report
    """
    chart = darboux.chart
    rng = np.random.default_rng(seed)
    points = darboux.center + rng.uniform(-radius, radius, size=(samples, chart.dim))
    report = Report(title=f"darboux_caratheodory(k={darboux.k})")

    deviation = np.abs(darboux.pullback(points) - darboux.structure.matrix(points))
    worst = float(np.max(deviation))
    k = int(np.argmax(np.max(deviation, axis=(1, 2))))
    report.add(CheckResult("darboux_form_deviation", samples, worst, worst < tol, witness=points[k].tolist()))

    det = abs(float(np.linalg.det(darboux.b_jacobian(darboux.center[None, :])[0])))
    report.add(CheckResult("jacobian_at_center", 1, det, det > 1e-10))
    logger.info("Darboux-Carathéodory 图卡 (k=%d): 偏差 %.3g", darboux.k, worst)
    return report
