#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
作用-角坐标模块
负责同伦算子给出的作用坐标、一致化流打靶给出的角坐标、
作用-角图卡（映射、b-Jacobi 矩阵、正规形拉回）以及正规形校验
"""

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from src.geometry.chart.expressions import Coord
from src.geometry.chart.fields import NumericField, as_points, b_finite_difference, b_shifted, wrap_difference
from src.geometry.poisson.bsymplectic import BSymplecticStructure
from src.integrable.action_angle.homotopy import HomotopyOperator
from src.integrable.systems.layout import StandardModelLayout, standard_model_form
from src.integrable.systems.target_bracket import is_cas_basic
from src.utils.errors import FlowError, InputContractError, ShootingError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 作用坐标
# ---------------------------------------------------------------------------
class ActionCoordinates:
    """
    a_1 = c·log|t|（解析给出），a_i = -I(λ_i)（i >= 2，同伦积分）

    α_i = -Σ_j λ_i^j df_j；按定向约定 c = -λ_1^1 > 0。
    """

    def __init__(self, system, lattice, layout, homotopy=None):
        self.system = system
        self.lattice = lattice
        self.layout = layout
        self.homotopy = homotopy or HomotopyOperator()
        self.chart = system.chart
        self.c = lattice.signed_period
        self.first = system.integrals[0] * self.c
        self.fields = [self._action(i) for i in range(1, system.rank)]

    def _action(self, i):
        def fn(X):
            coefficients = lambda b: self.lattice.at_values(b)[:, i, :]
            return -self.homotopy.integrate(coefficients, self.layout.action_values(X))

        return NumericField(fn, name=f"a{i + 1}")

    @property
    def all(self):
        return [self.first] + self.fields

    def alpha(self, i, points):
        """α_i 的 b-余切分量 (N, dim)"""
        X, _ = as_points(points)
        r = self.system.rank
        lam = self.lattice(X)[:, i, :]
        dF = self.system.differentials(X)[:, :r, :]
        return -np.einsum("nj,njd->nd", lam, dF)

    def verify(self, points, tol=1e-6, cas_tol=None):
        """
        da_i 与 α_i 的一致性、α_i 的闭性、a_i 的 Cas-basic 性（容差 cas_tol，缺省同 tol）、c 与模周期一致

        Returns:
            Report
        """
        X, _ = as_points(points)
        report = Report(title="action_coordinates")

        worst = 0.0
        for i, a in enumerate(self.fields, start=1):
            worst = max(worst, float(np.max(np.abs(a.b_differential_at(self.chart, X) - self.alpha(i, X)))))
        report.add(CheckResult("action_differential", X.shape[0], worst, worst < tol))

        worst = 0.0
        for i in range(self.system.rank):
            grad = b_finite_difference(lambda P, i=i: self.alpha(i, P), self.chart, X, 1e-5)
            worst = max(worst, float(np.max(np.abs(grad - np.swapaxes(grad, 1, 2)))))
        report.add(CheckResult("alpha_closed", X.shape[0], worst, worst < tol))

        cas_tol = tol if cas_tol is None else cas_tol
        worst = 0.0
        for a in self.fields:
            check = is_cas_basic(self.system, a, X, tol=cas_tol).get("cas_basic")
            worst = max(worst, check.max_residual)
        report.add(CheckResult("action_cas_basic", X.shape[0], worst, worst < cas_tol))

        gap = abs(abs(self.c) - self.lattice.modular_period)
        report.add(CheckResult("modular_period_consistency", 1, gap, gap < tol, detail={"c": self.c}))
        return report


def action_coordinates(structure, system, flows, lattice, homotopy=None):
    """
    Args:
        structure: b-辛结构
        system: 标准模型形式的系统
        flows: UniformizedFlows（仅用于确认一致化已完成）
        lattice: LatticeField

    Returns:
        ActionCoordinates
    """
    if flows.lattice is not lattice:
        raise InputContractError("一致化流与周期格插值表不匹配")
    layout = StandardModelLayout.detect(system)
    return ActionCoordinates(system, lattice, layout, homotopy)


# ---------------------------------------------------------------------------
# 截面
# ---------------------------------------------------------------------------
class FlatSection:
    """
    使 σ*ω 在横截值方向上为 0 的截面

    β 为 ω 在 θ = 0 切片上 (t, a_2, ..., a_r) 方向的限制，γ 为其同伦原函数。
    由 α_i = -Σ_j λ_i^j db_j 得角坐标的修正 g = -λ^{-T}γ：
    σ(b) = φ^{-g(b)}(切片点)，角坐标随之变为 θ + g。
    ω 含 db∧dp 一类混合项时不在此修正之内，偏差留给正规形校验。
    """

    def __init__(self, structure, layout, flows, integrator, homotopy=None):
        self.structure = structure
        self.layout = layout
        self.flows = flows
        self.lattice = flows.lattice
        self.integrator = integrator
        self.homotopy = homotopy or HomotopyOperator()
        self.chart = structure.chart
        self._slots = [self.chart.coord_slots[k] for k in layout.action_coords]

    def restricted_form(self, base, b):
        """切片点 base 的横截值换成 b 后，Ω 在 (t, a) 槽位上的块 (N, r, r)"""
        P = np.array(base, dtype=float, copy=True)
        P[:, list(self.layout.action_coords)] = b
        return self.structure.matrix(P)[:, self._slots][:, :, self._slots]

    def correction(self, points):
        """g(b(m))，(N, r)"""
        X, _ = as_points(points)
        base = self.layout.section(X)
        b = self.layout.action_values(X)
        gamma = self.homotopy.primitive(lambda values: self.restricted_form(base, values), b)
        lam = self.lattice.at_values(b)
        g = -np.linalg.solve(np.swapaxes(lam, 1, 2), gamma[..., None])[..., 0]
        g[np.abs(g) < 1e-14] = 0.0
        return g

    def __call__(self, points):
        X, _ = as_points(points)
        base = self.layout.section(X)
        g = self.correction(X)
        if not np.any(g):
            return base
        return self.chart.wrap(self.integrator.joint_flow_batch(self.flows.fields, base, -g))


# ---------------------------------------------------------------------------
# 角坐标
# ---------------------------------------------------------------------------
class ShootingAngles:
    """
    θ(m)：从截面点 σ(b(m)) 出发的一致化联合流到达 m 的时间向量，取值 [0, 1)^r

    批量 Gauss-Newton 打靶，Jacobi 矩阵为到达点处的 [Y_1, ..., Y_r]（各 Y 两两交换）。
    """

    def __init__(self, flows, layout, integrator, seeds_per_axis=4, tol=1e-12,
                 accept_tol=1e-8, max_iter=30, fd_step=1e-6, section=None):
        self.flows = flows
        self.layout = layout
        self._section = section or layout.section
        self.integrator = integrator
        self.chart = flows.chart
        self.rank = len(flows)
        self.seeds_per_axis = seeds_per_axis
        self.tol = tol
        self.accept_tol = accept_tol
        self.max_iter = max_iter
        self.fd_step = fd_step
        grid = np.arange(seeds_per_axis) / seeds_per_axis
        seeds = np.array(list(itertools.product(grid, repeat=self.rank)))
        self.seeds = seeds[np.argsort(np.linalg.norm(seeds, axis=1), kind="stable")]

    @classmethod
    def from_config(cls, flows, layout, integrator, action_angle_config, section=None):
        return cls(
            flows, layout, integrator, section=section,
            seeds_per_axis=int(action_angle_config.get("seeds_per_axis", 4)),
            tol=float(action_angle_config.get("shooting_tol", 1e-12)),
            max_iter=int(action_angle_config.get("max_shooting", 30)),
            fd_step=float(action_angle_config.get("fd_step", 1e-6)),
        )

    def section(self, points):
        return self._section(points)

    def _residual(self, start, s, target):
        reached = self.integrator.joint_flow_batch(self.flows.fields, start, s)
        return reached, self.chart.difference(reached, target)

    def _seed(self, start, target):
        best = np.zeros((target.shape[0], self.rank))
        best_norm = np.full(target.shape[0], np.inf)
        for seed in self.seeds:
            s = np.broadcast_to(seed, best.shape)
            _, G = self._residual(start, s, target)
            norm = np.linalg.norm(G, axis=1)
            # 严格小于：并列时保留范数更小的种子
            better = norm < best_norm
            best[better], best_norm[better] = seed, norm[better]
        return best

    def values(self, points, initial=None):
        """
        Args:
            points: (N, dim)
            initial: (N, r) 热启动值（相邻点的角坐标）

        Returns:
            ndarray: (N, r)

        Raises:
            ShootingError: 打靶不收敛
        """
        X, _ = as_points(points)
        start = self.section(X)
        s = self._seed(start, X) if initial is None else np.array(np.atleast_2d(initial), dtype=float)
        previous = np.full(X.shape[0], np.inf)
        norm = previous
        for _ in range(self.max_iter):
            reached, G = self._residual(start, s, X)
            norm = np.linalg.norm(G, axis=1)
            active = (norm >= self.tol) & (norm < 0.5 * previous)
            if not np.any(active):
                break
            J = np.stack([Y.smooth_components(reached[active]) for Y in self.flows.fields], axis=2)
            normal = np.einsum("nda,ndb->nab", J, J)
            rhs = -np.einsum("nda,nd->na", J, G[active])
            try:
                s[active] += np.linalg.solve(normal, rhs[..., None])[..., 0]
            except np.linalg.LinAlgError as e:
                raise ShootingError(f"打靶 Jacobi 矩阵奇异: {e}") from e
            previous = np.where(active, norm, 0.0)
        else:
            _, G = self._residual(start, s, X)
            norm = np.linalg.norm(G, axis=1)
        failed = norm > self.accept_tol
        if np.any(failed):
            raise ShootingError(
                f"{int(np.sum(failed))} 个点打靶不收敛，最大残差 {float(np.max(norm)):.3g}（截面可能不合适）"
            )
        return np.mod(s, 1.0)

    def b_jacobian(self, points, base=None):
        """
        角坐标的 b-微分 (N, r, dim)，各方向的扰动点从 base 热启动
        """
        X, _ = as_points(points)
        base = self.values(X) if base is None else base
        rows = []
        for slot in range(self.chart.dim):
            plus, minus = b_shifted(self.chart, X, slot, self.fd_step)
            delta = wrap_difference(self.values(plus, base) - self.values(minus, base))
            rows.append(delta / (2.0 * self.fd_step))
        return np.stack(rows, axis=2)


class CoordinateAngles:
    """已是正规形的图卡：角坐标即周期坐标本身"""

    def __init__(self, chart, coords):
        self.chart = chart
        self.coords = tuple(coords)

    def values(self, points, initial=None):
        X, _ = as_points(points)
        return np.mod(X[:, list(self.coords)], 1.0)

    def b_jacobian(self, points, base=None):
        X, _ = as_points(points)
        rows = np.zeros((X.shape[0], len(self.coords), self.chart.dim))
        for i, coord in enumerate(self.coords):
            rows[:, i, self.chart.coord_slots[coord]] = 1.0
        return rows


class ShiftedAngles:
    """θ_index + weight·h，作为负对照"""

    def __init__(self, base, index, function, weight):
        self.base = base
        self.chart = base.chart
        self.index = index
        self.function = function
        self.weight = weight

    def values(self, points, initial=None):
        X, _ = as_points(points)
        theta = np.array(self.base.values(X, initial), copy=True)
        theta[:, self.index] = np.mod(theta[:, self.index] + self.weight * self.function.value(self.chart, X), 1.0)
        return theta

    def b_jacobian(self, points, base=None):
        X, _ = as_points(points)
        rows = np.array(self.base.b_jacobian(X), copy=True)
        rows[:, self.index] += self.weight * self.function.b_differential_at(self.chart, X)
        return rows


def angle_coordinates(structure, system, flows, integrator, action_angle_config=None, layout=None, section=None):
    """
    基于截面的角坐标

    Args:
        section: 点集 -> 截面点集的可调用对象，须保持横截值；
            缺省为 FlatSection（θ = 0 切片按 σ*ω 的横截部分修正）

    Returns:
        ShootingAngles
    """
    config = action_angle_config or {}
    layout = layout or StandardModelLayout.detect(system)
    if section is None:
        section = FlatSection(structure, layout, flows, integrator, HomotopyOperator.from_config(config))
    return ShootingAngles.from_config(flows, layout, integrator, config, section)


# ---------------------------------------------------------------------------
# 作用-角图卡
# ---------------------------------------------------------------------------
@dataclass
class ActionAngleChart:
    """
    (θ_1..θ_r, t, a_2..a_r, p_1, q_1, ...) 与模周期 c

    Args:
        source: 源 b-辛结构
        c: 模周期（带定向符号）
        angles: 角坐标映射（values / b_jacobian 接口）
        defining: 定义函数 t（光滑场）
        actions: a_2..a_r
        transverse: p_1, q_1, ...（非交换部分积分）
        flows: 一致化流（恒等图卡为 None）
    """

    source: BSymplecticStructure
    c: float
    angles: object
    defining: object
    actions: list
    transverse: list
    flows: object = None
    target: BSymplecticStructure = field(init=False)

    def __post_init__(self):
        r = len(self.actions) + 1
        s = r + len(self.transverse)
        if self.source.chart.dim != r + s:
            raise InputContractError(f"ℓ = (s - r)/2 与维数不符：r = {r}, s = {s}, dim = {self.source.chart.dim}")
        chart, omega = standard_model_form(r, s, self.c)
        self.target = BSymplecticStructure(omega)
        self._target_matrix = self.target.matrix(np.zeros((1, chart.dim)))[0]

    @property
    def rank(self):
        return len(self.actions) + 1

    @property
    def ell(self):
        return len(self.transverse) // 2

    @property
    def target_chart(self):
        return self.target.chart

    @classmethod
    def identity(cls, system, c=None):
        """已是正规形的标准模型上的恒等图卡"""
        layout = StandardModelLayout.detect(system)
        chart = system.chart
        if c is None:
            slot = chart.coord_slots[layout.angle_coords[0]]
            c = -float(system.structure.matrix(np.zeros((1, chart.dim)))[0, 0, slot])
        return cls(
            system.structure, c, CoordinateAngles(chart, layout.angle_coords), Coord(chart.t_index),
            [Coord(k) for k in layout.action_coords[1:]], [Coord(k) for k in layout.transverse_coords],
        )

    def with_angle(self, index, function, weight):
        """θ_index 换成 θ_index + weight·function 的图卡"""
        return replace(self, angles=ShiftedAngles(self.angles, index, function, weight))

    def map(self, points):
        """目标坐标 (N, dim)，顺序 (θ.., t, a.., p1, q1, ..)"""
        X, _ = as_points(points)
        chart = self.source.chart
        columns = [self.angles.values(X), self.defining.value(chart, X)[:, None]]
        columns += [f.value(chart, X)[:, None] for f in self.actions + self.transverse]
        return np.hstack(columns)

    def b_jacobian(self, points):
        """
        目标槽位顺序 (dt/t, dθ.., da.., dp1, dq1, ..) 的 b-Jacobi 矩阵 (N, dim, dim)

        t 行为 dT/T：定义函数可符号求导时精确，否则对 log|T| 做乘法步长差分。
        """
        X, _ = as_points(points)
        chart = self.source.chart
        T = self.defining
        if getattr(T, "is_symbolic", False):
            t_row = T.b_differential_at(chart, X) / T.value(chart, X)[:, None]
        else:
            t_row = NumericField(lambda P: np.log(np.abs(T.value(chart, P)))).b_differential_at(chart, X)
        rows = [t_row[:, None, :], self.angles.b_jacobian(X)]
        rows += [f.b_differential_at(chart, X)[:, None, :] for f in self.actions + self.transverse]
        return np.concatenate(rows, axis=1)

    def pullback(self, points, jacobian=None):
        """正规形沿图卡映射的拉回 J^T Ω_N J (N, dim, dim)"""
        J = self.b_jacobian(points) if jacobian is None else jacobian
        return np.einsum("nai,ab,nbj->nij", J, self._target_matrix, J)

    def export(self, points):
        """采样网格上的全部坐标函数与 c"""
        X, _ = as_points(points)
        return {
            "c": self.c,
            "source_names": list(self.source.chart.names),
            "target_names": list(self.target_chart.names),
            "points": X,
            "values": self.map(X),
        }


def verify_normal_form(structure, chart, points, tol=1e-5, system=None, integrator=None,
                       invariance_tol=1e-8, bracket_tol=1e-6, seed=0):
    """
    正规形校验

    检查项：拉回偏差、Jacobi 矩阵非奇异、积分沿环面轨道不变（给出 system 时）、
    Y_i(θ_j) = δ_ij（图卡带一致化流时）、{θ_i, a_j} = δ_ij 与 {θ_i, θ_j} = 0。

    Args:
        structure: 源 b-辛结构
        chart: ActionAngleChart
        points: 采样点（应避开 Z）

    Returns:
        Report
    """
    X, _ = as_points(points)
    report = Report(title="verify_normal_form")
    J = chart.b_jacobian(X)
    Omega = structure.matrix(X)
    deviation = np.abs(chart.pullback(X, J) - Omega)
    k = int(np.argmax(np.max(deviation, axis=(1, 2))))
    worst = float(np.max(deviation))
    report.add(CheckResult("normal_form_deviation", X.shape[0], worst, worst < tol, witness=X[k].tolist()))

    det = np.abs(np.linalg.det(J))
    report.add(CheckResult("jacobian_nonsingular", X.shape[0], float(np.min(det)), bool(np.all(det > 1e-10))))

    r = chart.rank
    if system is not None and integrator is not None:
        rng = np.random.default_rng(seed)
        fields = system.hamiltonian_fields()
        orbit = [system.values(X)]
        for _ in range(3):
            try:
                moved = integrator.joint_flow_batch(fields, X, rng.uniform(-0.5, 0.5, size=(X.shape[0], r)))
            except FlowError as e:
                logger.warning("环面轨道采样失败: %s", e)
                continue
            orbit.append(system.values(moved))
        spread = float(np.max(np.var(np.stack(orbit), axis=0)))
        report.add(CheckResult("integrals_torus_invariant", X.shape[0], spread, spread < invariance_tol))

    theta_rows = J[:, 1:r + 1, :]
    if chart.flows is not None:
        Y = np.stack([field.b_components(X) for field in chart.flows.fields], axis=1)
        directional = np.einsum("nid,njd->nij", Y, theta_rows)
        worst = float(np.max(np.abs(directional - np.eye(r))))
        report.add(CheckResult("angle_directional_derivative", X.shape[0], worst, worst < bracket_tol))

    P = structure.poisson_matrix(X)
    action_rows = np.concatenate([chart.c * J[:, :1, :], J[:, r + 1:2 * r, :]], axis=1)
    mixed = np.einsum("nia,nab,njb->nij", theta_rows, P, action_rows)
    angles = np.einsum("nia,nab,njb->nij", theta_rows, P, theta_rows)
    worst = max(float(np.max(np.abs(mixed - np.eye(r)))), float(np.max(np.abs(angles))))
    report.add(CheckResult("action_angle_brackets", X.shape[0], worst, worst < bracket_tol))

    logger.info("正规形校验: 偏差 %.3g，%s", report.get("normal_form_deviation").max_residual,
                "通过" if report.passed else f"未通过 {report.failed_checks()}")
    return report
