#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
周期一致化模块
负责周期格基在横截值网格上的延拓与三次插值，一致化向量场 Y_i = Σ_j λ_i^j X_{f_j}，
以及回归残差、交换性、李导数与二阶李导数的校验
"""

import itertools
import logging
from collections import deque

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.geometry.chart.fields import NumericField, as_points, b_finite_difference
from src.geometry.forms.bforms import PointwiseVectorField
from src.utils.errors import FlowError, InterpolationError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)


class LatticeField:
    """
    横截值 b = (t, a_2, ..., a_r) 上的周期格基 λ(b)

    在每个坐标方向取 grid_points 个节点（t 方向包含 0），从 Z 上的节点出发
    按邻接顺序热启动延拓，再做三次张量插值。
    """

    def __init__(self, system, layout, finder, grid_points=5, grid_margin=0.1):
        """
        Args:
            system: 标准模型形式的系统
            layout: StandardModelLayout
            finder: PeriodLatticeFinder
            grid_points: 每个方向的节点数（三次插值至少 4 个）
            grid_margin: 相对区间宽度的内缩比例
        """
        if grid_points < 4:
            raise InterpolationError("三次插值每个方向至少需要 4 个节点")
        self.system = system
        self.layout = layout
        self.finder = finder
        self.chart = system.chart
        self.rank = system.rank
        self.center = np.array([0.5 * (lo + hi) for lo, hi in self.chart.box])
        self.axes = [self._axis(k, grid_points, grid_margin) for k in layout.action_coords]
        self.values = None
        self.bases = {}
        self._interpolator = None

    def _axis(self, coord, count, margin):
        lo, hi = self.chart.box[coord]
        pad = margin * (hi - lo)
        axis = np.linspace(lo + pad, hi - pad, count)
        if coord == self.chart.t_index and not np.any(axis == 0.0):
            axis = np.sort(np.append(axis, 0.0))
        return axis

    def node_point(self, index):
        b = [axis[i] for axis, i in zip(self.axes, index)]
        return self.layout.base_point(self.center, b)

    def build(self):
        """
        计算所有节点上的格基并建立插值器

        Returns:
            LatticeField: self
        """
        fields = self.system.hamiltonian_fields()
        shape = tuple(len(axis) for axis in self.axes)
        start = tuple(int(np.argmin(np.abs(axis))) for axis in self.axes)
        values = np.zeros(shape + (self.rank, self.rank))
        on_z_index = start[0]

        queue, seen = deque([(start, None)]), {start}
        while queue:
            index, initial = queue.popleft()
            basis = self.finder.find(
                fields, self.node_point(index), initial=initial, on_z=index[0] == on_z_index
            )
            self.bases[index] = basis
            values[index] = basis.basis
            for axis in range(len(shape)):
                for step in (-1, 1):
                    neighbor = list(index)
                    neighbor[axis] += step
                    neighbor = tuple(neighbor)
                    if 0 <= neighbor[axis] < shape[axis] and neighbor not in seen:
                        seen.add(neighbor)
                        queue.append((neighbor, basis.basis))

        self.values = values
        self.on_z_basis = self.bases[start]
        self._interpolator = RegularGridInterpolator(
            self.axes, values.reshape(shape + (self.rank * self.rank,)),
            method="cubic", bounds_error=False, fill_value=None,
        )
        logger.info("周期格插值表: %s 个节点，模周期 %.10g", int(np.prod(shape)), self.modular_period)
        return self

    @property
    def modular_period(self):
        return self.on_z_basis.modular_period

    @property
    def signed_period(self):
        return self.on_z_basis.signed_period

    def at_values(self, b):
        """λ(b)，(N, r, r)"""
        b = np.atleast_2d(np.asarray(b, dtype=float))
        if self._interpolator is None:
            raise InterpolationError("插值表尚未建立")
        return self._interpolator(b).reshape(b.shape[0], self.rank, self.rank)

    def __call__(self, points):
        """λ(b(p))，(N, r, r)"""
        X, _ = as_points(points)
        return self.at_values(self.layout.action_values(X))

    def coefficient_field(self, i, j):
        """λ_i^j ∘ b 作为标量场"""
        return NumericField(lambda X: self(X)[:, i, j], name=f"lambda_{i + 1}^{j + 1}")

    def to_dict(self):
        return {"axes": self.axes, "values": self.values, "modular_period": self.modular_period}


class UniformizedFlows:
    """
    一致化向量场 Y_1..Y_r，每个 Y_i 的时间 1 流回到出发点
    """

    def __init__(self, structure, system, lattice):
        self.structure = structure
        self.system = system
        self.lattice = lattice
        self.chart = structure.chart
        self.hamiltonian = system.hamiltonian_fields()
        self.fields = [self._make(i) for i in range(system.rank)]

    def _make(self, i):
        hamiltonian = self.hamiltonian

        def fn(X):
            lam = self.lattice(X)
            total = np.zeros((X.shape[0], self.chart.dim))
            for j, field in enumerate(hamiltonian):
                total += lam[:, i, j][:, None] * field.b_components(X)
            return total

        return PointwiseVectorField(self.chart, fn, name=f"Y_{i + 1}")

    def __getitem__(self, i):
        return self.fields[i]

    def __len__(self):
        return len(self.fields)

    def double_lie_derivative(self, i, points, inner_step=1e-5, outer_step=1e-3):
        """
        L_Y L_Y ω：对 β = L_Y ω（内层差分）再用 Cartan 公式做外层差分

        Returns:
            ndarray: (N, dim, dim)
        """
        X, _ = as_points(points)
        Y = self.fields[i]
        S = self.structure

        def beta(P):
            return S.lie_derivative(Y, P, inner_step)

        def contracted(P):
            return np.einsum("ni,nij->nj", Y.b_components(P), beta(P))

        grad = b_finite_difference(contracted, self.chart, X, outer_step)
        result = grad - np.swapaxes(grad, 1, 2)
        # (dβ)_{kij} = D_k β_ij + D_i β_jk + D_j β_ki
        dbeta = b_finite_difference(beta, self.chart, X, outer_step)
        d3 = dbeta + np.transpose(dbeta, (0, 2, 3, 1)) + np.transpose(dbeta, (0, 3, 1, 2))
        result += np.einsum("nk,nkij->nij", Y.b_components(X), d3)
        return result

    def verify(self, integrator, tori_points, lie_points, tolerances=None):
        """
        一致化校验

        Args:
            integrator: 流积分器
            tori_points: 各环面上的采样点
            lie_points: 李导数采样点
            tolerances: {"return": 1e-6, "commutation": 1e-7, "lie": 1e-7, "double_lie": 1e-5, "cas": 1e-6}

        Returns:
            Report
        """
        tol = {"return": 1e-6, "commutation": 1e-7, "lie": 1e-7, "double_lie": 1e-5, "cas": 1e-6}
        tol.update(tolerances or {})
        report = Report(title="uniformize")
        chart = self.chart
        tori = np.atleast_2d(tori_points)
        lie = np.atleast_2d(lie_points)

        worst, witness = 0.0, None
        for Y in self.fields:
            try:
                residual = chart.distance(integrator.flow_batch(Y, tori, 1.0), tori)
            except FlowError as e:
                logger.warning("回归校验中积分失败: %s", e)
                residual = np.full(tori.shape[0], np.inf)
            k = int(np.argmax(residual))
            if residual[k] > worst:
                worst, witness = float(residual[k]), tori[k].tolist()
        report.add(CheckResult("return_residual", tori.shape[0], worst, worst < tol["return"], witness=witness))

        worst = 0.0
        rng = np.random.default_rng(0)
        for a, b in itertools.combinations(range(len(self.fields)), 2):
            sa, sb = rng.uniform(0.1, 0.9, size=(2, tori.shape[0]))
            Ya, Yb = self.fields[a], self.fields[b]
            first = integrator.flow_batch(Ya, integrator.flow_batch(Yb, tori, sb), sa)
            second = integrator.flow_batch(Yb, integrator.flow_batch(Ya, tori, sa), sb)
            worst = max(worst, float(np.max(chart.distance(first, second))))
        report.add(CheckResult("commutation", tori.shape[0], worst, worst < tol["commutation"]))

        worst = max(
            (float(np.max(np.abs(self.structure.lie_derivative(Y, lie)))) for Y in self.fields), default=0.0
        )
        report.add(CheckResult("lie_derivative", lie.shape[0], worst, worst < tol["lie"]))

        worst = max(
            (float(np.max(np.abs(self.double_lie_derivative(i, lie)))) for i in range(len(self.fields))),
            default=0.0,
        )
        report.add(CheckResult("double_lie_derivative", lie.shape[0], worst, worst < tol["double_lie"]))

        worst = 0.0
        for i in range(self.lattice.rank):
            for j in range(self.lattice.rank):
                coefficient = self.lattice.coefficient_field(i, j)
                for f in self.system.integrals:
                    values = self.structure.bracket_values(coefficient, f, lie)
                    worst = max(worst, float(np.max(np.abs(values))))
        report.add(CheckResult("lattice_cas_basic", lie.shape[0], worst, worst < tol["cas"]))
        return report


def uniformize(structure, system, lattice):
    """
    Y_i = Σ_j λ_i^j(b) X_{f_j}

    Returns:
        UniformizedFlows
    """
    if lattice.values is None:
        lattice.build()
    return UniformizedFlows(structure, system, lattice)
