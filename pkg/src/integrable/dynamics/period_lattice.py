#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
周期格模块
负责在 Liouville 环面上寻找联合流的回归时间向量：粗网格扫描、
有限差分单值矩阵的 Gauss-Newton 细化、整数列变换约化与格基定向
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import minimum_filter

from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.utils.errors import FlowError, LatticeNotFoundError, SingularMonodromyError

logger = logging.getLogger(__name__)


@dataclass
class PeriodLatticeBasis:
    """
    周期格基

    Args:
        base_point: 环面上的基点
        basis: (r, r)，第 i 行为 λ_i
        residuals: 每个基向量的回归残差 |Φ^{λ_i}(p0) - p0|
        on_z: 基点是否在 Z 上

    定向约定：λ_1^1 < 0，且 i >= 2 时 λ_i^i < 0；
    在 ι_X ω = -df 约定下这使模周期 c = -λ_1^1 为正，角坐标沿原有角坐标增加。
    """

    base_point: np.ndarray
    basis: np.ndarray
    residuals: np.ndarray
    on_z: bool = False

    @property
    def rank(self):
        return self.basis.shape[0]

    @property
    def modular_period(self):
        """|λ_1^1|"""
        return float(abs(self.basis[0, 0]))

    @property
    def signed_period(self):
        """c = -λ_1^1（正规形 (c/t)dθ_1∧dt 中的 c）"""
        return float(-self.basis[0, 0])

    def z_normalization_residual(self):
        """max_{i>1} |λ_i^1|"""
        if self.rank < 2:
            return 0.0
        return float(np.max(np.abs(self.basis[1:, 0])))

    def to_dict(self):
        return {
            "base_point": self.base_point,
            "basis": self.basis,
            "residuals": self.residuals,
            "modular_period": self.modular_period,
            "on_z": self.on_z,
        }


class PeriodLatticeFinder:
    """
    周期格搜索器

    Args:
        integrator: 流积分器
        scan_max: 扫描区间 [-S, S]
        scan_step: s_2..s_r 的网格步长
        fine_step: 沿 X_1 的稠密采样步长
        scan_threshold: 候选点的回归距离阈值
        newton_tol: Newton 收敛阈值
        residual_tol: 接受回归向量的残差阈值
        max_newton: Newton 最大迭代次数
        fd_step: 单值矩阵差分步长
    """

    def __init__(self, integrator, scan_max=5.0, scan_step=0.1, fine_step=0.01, scan_threshold=0.25,
                 newton_tol=1e-10, residual_tol=1e-8, max_newton=25, fd_step=1e-6):
        self.integrator = integrator
        self.chart = integrator.chart
        self.scan_max = scan_max
        self.scan_step = scan_step
        self.fine_step = fine_step
        self.scan_threshold = scan_threshold
        self.newton_tol = newton_tol
        self.residual_tol = residual_tol
        self.max_newton = max_newton
        self.fd_step = fd_step

    @classmethod
    def from_config(cls, integrator, lattice_config):
        keys = ("scan_max", "scan_step", "fine_step", "scan_threshold",
                "newton_tol", "residual_tol", "fd_step")
        kwargs = {k: float(lattice_config[k]) for k in keys if k in lattice_config}
        if "max_newton" in lattice_config:
            kwargs["max_newton"] = int(lattice_config["max_newton"])
        return cls(integrator, **kwargs)

    # ---- 回归映射 ----
    def return_map(self, fields, p0, s):
        """G(s) = Φ^s(p0) - p0（周期坐标取折回差）"""
        return self.chart.difference(self.integrator.joint_flow(fields, p0, s), p0)

    def monodromy(self, fields, p0, s):
        """∂G/∂s 的中心差分 (dim, r)"""
        h = self.fd_step
        columns = []
        for k in range(len(s)):
            step = np.zeros(len(s))
            step[k] = h
            plus = self.return_map(fields, p0, s + step)
            minus = self.return_map(fields, p0, s - step)
            columns.append((plus - minus) / (2.0 * h))
        return np.stack(columns, axis=1)

    def refine(self, fields, p0, s_init):
        """
        Gauss-Newton 细化回归向量（带回溯）

        Returns:
            tuple: (s, residual)

        Raises:
            SingularMonodromyError: 单值矩阵秩亏
        """
        s = np.array(s_init, dtype=float)
        G = self.return_map(fields, p0, s)
        residual = float(np.linalg.norm(G))
        for _ in range(self.max_newton):
            if residual < self.newton_tol:
                break
            J = self.monodromy(fields, p0, s)
            singular = np.linalg.svd(J, compute_uv=False)
            if singular[-1] < 1e-10 * max(singular[0], 1.0):
                raise SingularMonodromyError(f"单值矩阵在 s = {s.tolist()} 处秩亏")
            delta = np.linalg.lstsq(J, -G, rcond=None)[0]
            damping = 1.0
            for _ in range(8):
                trial = s + damping * delta
                G_trial = self.return_map(fields, p0, trial)
                trial_residual = float(np.linalg.norm(G_trial))
                if trial_residual < residual:
                    break
                damping *= 0.5
            else:
                break
            s, G, residual = trial, G_trial, trial_residual
        return s, residual

    # ---- 扫描 ----
    def scan(self, fields, p0):
        """
        粗扫描：对 s_2..s_r 的网格值，沿 X_1 做稠密输出并在 [-S, S] 上细采样

        Returns:
            list: 按范数排序的候选时间向量
        """
        r = len(fields)
        S = self.scan_max
        grid = np.arange(-S, S + 0.5 * self.scan_step, self.scan_step)
        fine = np.arange(-S, S + 0.5 * self.fine_step, self.fine_step)
        shape = (len(grid),) * (r - 1) + (len(fine),)
        distances = np.full(shape, np.inf)

        for index in itertools.product(range(len(grid)), repeat=r - 1):
            others = [grid[i] for i in index]
            try:
                start = self.integrator.joint_flow(fields[1:], p0, others) if others else np.array(p0, dtype=float)
                forward = self.integrator.integrate(fields[0], start, S, dense=True)
                backward = self.integrator.integrate(fields[0], start, -S, dense=True)
            except FlowError as e:
                logger.debug("扫描点 %s 跳过: %s", others, e)
                continue
            row = np.empty((len(fine), self.chart.dim))
            positive = fine >= 0.0
            row[positive] = forward.at(fine[positive])
            row[~positive] = backward.at(fine[~positive])
            distances[index] = self.chart.distance(row, p0)

        local = minimum_filter(distances, size=3, mode="nearest")
        mask = (distances == local) & (distances < self.scan_threshold)
        candidates = []
        for position in zip(*np.nonzero(mask)):
            s = np.array([fine[position[-1]]] + [grid[i] for i in position[:-1]])
            if np.linalg.norm(s) > 0.5 * self.scan_step:
                candidates.append(s)
        candidates.sort(key=np.linalg.norm)
        logger.debug("周期格扫描得到 %d 个候选", len(candidates))
        return candidates

    # ---- 约化 ----
    @staticmethod
    def reduce_first_column(basis, tol=1e-9, max_rounds=64):
        """
        整数行变换使至多一个基向量的第一个分量非零（对第一列做辗转相除）
        """
        B = np.array(basis, dtype=float)
        scale = max(float(np.max(np.abs(B))), 1.0)
        for _ in range(max_rounds):
            active = [i for i in range(B.shape[0]) if abs(B[i, 0]) > tol * scale]
            if len(active) <= 1:
                break
            pivot = min(active, key=lambda i: abs(B[i, 0]))
            for i in active:
                if i != pivot:
                    B[i] -= np.round(B[i, 0] / B[pivot, 0]) * B[pivot]
        else:
            logger.warning("第一列约化未收敛：回归时间的第一个分量不可公度")
        active = [i for i in range(B.shape[0]) if abs(B[i, 0]) > tol * scale]
        if active:
            lead = active[0]
            order = [lead] + [i for i in range(B.shape[0]) if i != lead]
            B = B[order]
        return B

    @staticmethod
    def orient(basis):
        B = np.array(basis, dtype=float)
        for i in range(B.shape[0]):
            pivot = B[i, i] if abs(B[i, i]) > 1e-12 else B[i, np.argmax(np.abs(B[i]))]
            if pivot > 0:
                B[i] = -B[i]
        return B

    # ---- 主流程 ----
    def find(self, fields, p0, initial=None, on_z=False):
        """
        寻找周期格基

        Args:
            fields: 交换部分的哈密顿向量场 X_1..X_r
            p0: 环面上的点
            initial: 相邻环面的格基（热启动，失败时回退到扫描）
            on_z: 基点是否在 Z 上

        Returns:
            PeriodLatticeBasis

        Raises:
            LatticeNotFoundError: 扫描范围内找不到 r 个独立回归向量
        """
        p0 = np.asarray(p0, dtype=float)
        r = len(fields)
        if initial is not None:
            try:
                return self._polish(fields, p0, np.asarray(initial, dtype=float), on_z)
            except (LatticeNotFoundError, SingularMonodromyError, FlowError) as e:
                logger.info("热启动失败，改用扫描: %s", e)

        vectors = []
        for candidate in self.scan(fields, p0):
            try:
                s, residual = self.refine(fields, p0, candidate)
            except (SingularMonodromyError, FlowError) as e:
                logger.debug("候选 %s 细化失败: %s", candidate.tolist(), e)
                continue
            if residual >= self.residual_tol or np.linalg.norm(s) < 1e-6:
                continue
            if any(np.linalg.norm(s - v) < 1e-6 or np.linalg.norm(s + v) < 1e-6 for v in vectors):
                continue
            trial = np.array(vectors + [s])
            if np.linalg.matrix_rank(trial, tol=1e-6) == len(trial):
                vectors.append(s)
            if len(vectors) == r:
                break
        if len(vectors) < r:
            raise LatticeNotFoundError(
                f"在 [-{self.scan_max}, {self.scan_max}]^{r} 内只找到 {len(vectors)} 个独立回归向量"
            )
        return self._polish(fields, p0, self.orient(self.reduce_first_column(np.array(vectors))), on_z)

    def _primitive(self, fields, p0, s, residual, max_divisor=4):
        """热启动可能收敛到格向量的整数倍：s/k 也回归时换成 s/k"""
        k = 2
        while k <= max_divisor:
            trial = s / k
            if np.linalg.norm(self.return_map(fields, p0, trial)) < self.scan_threshold:
                try:
                    shorter, shorter_residual = self.refine(fields, p0, trial)
                except (SingularMonodromyError, FlowError):
                    shorter_residual = np.inf
                if shorter_residual < self.residual_tol and 1e-6 < np.linalg.norm(shorter) < np.linalg.norm(s) - 1e-6:
                    s, residual, k = shorter, shorter_residual, 2
                    continue
            k += 1
        return s, residual

    def _polish(self, fields, p0, basis, on_z):
        rows, residuals = [], []
        for vector in basis:
            s, residual = self.refine(fields, p0, vector)
            if residual >= self.residual_tol:
                raise LatticeNotFoundError(f"回归向量 {vector.tolist()} 细化后残差 {residual:.3g}")
            s, residual = self._primitive(fields, p0, s, residual)
            rows.append(s)
            residuals.append(residual)
        B = np.array(rows)
        if abs(np.linalg.det(B)) < 1e-10:
            raise LatticeNotFoundError("格基退化")
        return PeriodLatticeBasis(p0.copy(), B, np.array(residuals), on_z)


def period_lattice(structure, system, p0, finder=None, initial=None):
    """
    系统交换部分在 p0 所在环面上的周期格

    Returns:
        PeriodLatticeBasis
    """
    finder = finder or PeriodLatticeFinder(FlowIntegrator(structure.chart))
    chart = structure.chart
    on_z = chart.t_index is not None and abs(float(np.asarray(p0)[chart.t_index])) < finder.integrator.z_clamp
    fields = [structure.hamiltonian_field(f) for f in system.commuting]
    basis = finder.find(fields, p0, initial=initial, on_z=on_z)
    logger.info("周期格: 模周期 %.10g，残差 %s", basis.modular_period, np.array2string(basis.residuals))
    return basis
