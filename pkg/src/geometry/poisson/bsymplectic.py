#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
b-辛结构模块
负责 b-辛形式的非退化性与闭性校验、哈密顿向量场、泊松括号、
Jacobi 残差、沿向量场的李导数，以及留数/光滑部分分解

符号约定：ι_{X_f} ω = -df，{f, g} = ω(X_f, X_g) = X_f(g)。
系数矩阵 Ω 满足 ω(U, V) = U^T Ω V，于是 X_f = Ω^{-1} df，
泊松矩阵 P = -Ω^{-1}，{f, g} = df^T P dg。
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.geometry.chart.expressions import Const, SmoothField, add, mul
from src.geometry.chart.fields import ScalarField, as_points, b_finite_difference
from src.geometry.forms.bforms import BForm, BVectorField, PointwiseVectorField, exterior_d, wedge
from src.utils.errors import DegreeError, NondegeneracyError
from src.utils.reports import CheckResult, Report

logger = logging.getLogger(__name__)

DEFAULT_DET_TOL = 1e-10


def relative_det(matrices):
    """|det Ω| / max(1, ||Ω||)^dim"""
    dim = matrices.shape[-1]
    norms = np.maximum(np.linalg.norm(matrices, ord=2, axis=(-2, -1)), 1.0)
    return np.abs(np.linalg.det(matrices)) / norms ** dim


class BSymplecticStructure:
    """
    图卡上的 b-辛结构

    Args:
        omega: 2 次 b-形式
        det_tol: 非退化阈值（相对矩阵范数）
    """

    def __init__(self, omega, det_tol=DEFAULT_DET_TOL):
        if omega.degree != 2:
            raise DegreeError("b-辛结构需要 2 次 b-形式")
        self.omega = omega
        self.chart = omega.chart
        self.det_tol = det_tol

    # ---- 矩阵 ----
    @cached_property
    def is_constant(self):
        return all(isinstance(e, Const) for _, e in self.omega.terms)

    @cached_property
    def constant_poisson(self):
        """常系数时的泊松矩阵 P = -Ω^{-1}"""
        omega = self.omega.matrix(np.zeros(self.chart.dim))[0]
        if relative_det(omega[None])[0] <= self.det_tol:
            raise NondegeneracyError("常系数 b-辛矩阵退化")
        return -np.linalg.inv(omega)

    @cached_property
    def omega_derivatives(self):
        """D_k Ω 的系数表达式 {k: {(i, j): 表达式}}"""
        return {
            k: {index: expr.b_derivative(self.chart, k) for index, expr in self.omega.terms}
            for k in range(self.chart.dim)
        }

    def matrix(self, points):
        return self.omega.matrix(points)

    def poisson_matrix(self, points):
        """
        逐点泊松矩阵 P = -Ω^{-1}

        Raises:
            NondegeneracyError: 某点 Ω 退化（携带该点）
        """
        X, _ = as_points(points)
        if self.is_constant:
            return np.broadcast_to(self.constant_poisson, (X.shape[0],) + self.constant_poisson.shape)
        omega = self.matrix(X)
        singular = relative_det(omega) <= self.det_tol
        if np.any(singular):
            bad = X[np.argmax(singular)]
            raise NondegeneracyError(f"b-辛矩阵在点 {bad.tolist()} 退化", point=bad)
        return -np.linalg.inv(omega)

    def poisson_matrix_derivative(self, points, P=None):
        """
        D_k P = P (D_k Ω) P

        Returns:
            ndarray: (N, dim, dim, dim)，[:, k] = D_k P
        """
        X, _ = as_points(points)
        dim = self.chart.dim
        if P is None:
            P = self.poisson_matrix(X)
        out = np.zeros((X.shape[0], dim, dim, dim))
        if self.is_constant:
            return out
        for k, entries in self.omega_derivatives.items():
            d_omega = np.zeros((X.shape[0], dim, dim))
            for (i, j), expr in entries.items():
                values = expr.evaluate(X)
                d_omega[:, i, j] = values
                d_omega[:, j, i] = -values
            out[:, k] = P @ d_omega @ P
        return out

    # ---- 哈密顿场与括号 ----
    def hamiltonian_field(self, f):
        """
        ι_{X_f} ω = -df 的解

        Ω 为常系数且 f 可符号求导时返回 BVectorField，否则返回逐点求解的向量场。
        """
        if self.is_constant and getattr(f, "is_symbolic", False):
            inverse = -self.constant_poisson
            df = f.b_differential(self.chart)
            components = tuple(
                add(*(mul(inverse[i, j], df[j]) for j in range(self.chart.dim) if inverse[i, j] != 0.0))
                for i in range(self.chart.dim)
            )
            return BVectorField(self.chart, components)

        def solve(X):
            P = self.poisson_matrix(X)
            df = f.b_differential_at(self.chart, X)
            return -np.einsum("nij,nj->ni", P, df)

        return PointwiseVectorField(self.chart, solve, name=f"X[{f}]")

    def bracket(self, f, g):
        """
        泊松括号 {f, g}

        常系数且两者可符号求导时得到精确的 SmoothField，否则返回逐点求值的 BracketField。
        两个 b-函数的括号在 Z 上有限（log 部分只通过 b-微分出现）。
        """
        if self.is_constant and getattr(f, "is_symbolic", False) and getattr(g, "is_symbolic", False):
            P = self.constant_poisson
            df, dg = f.b_differential(self.chart), g.b_differential(self.chart)
            dim = self.chart.dim
            return add(*(
                mul(P[i, j], df[i], dg[j])
                for i in range(dim) for j in range(dim) if P[i, j] != 0.0
            ))
        return BracketField(self, f, g)

    def bracket_values(self, f, g, points):
        X, _ = as_points(points)
        P = self.poisson_matrix(X)
        df = f.b_differential_at(self.chart, X)
        dg = g.b_differential_at(self.chart, X)
        return np.einsum("ni,nij,nj->n", df, P, dg)

    def jacobi_residual(self, f, g, h, points):
        """
        max |{{f,g},h} + {{g,h},f} + {{h,f},g}|
        """
        X, _ = as_points(points)
        total = (
            self.bracket_values(self.bracket(f, g), h, X)
            + self.bracket_values(self.bracket(g, h), f, X)
            + self.bracket_values(self.bracket(h, f), g, X)
        )
        return float(np.max(np.abs(total))) if X.shape[0] else 0.0

    # ---- 李导数 ----
    def contraction_values(self, vector, points):
        """η = ι_V ω 的逐点分量 (N, dim)"""
        X, _ = as_points(points)
        V = vector.b_components(X)
        return np.einsum("ni,nij->nj", V, self.matrix(X))

    def lie_derivative(self, vector, points, step=1e-5):
        """
        Cartan 公式 L_V ω = ι_V dω + d(ι_V ω)

        d(ι_V ω) 用 b-标架中心差分，ι_V dω 用符号 dω 逐点缩并。

        Returns:
            ndarray: (N, dim, dim) 2-形式系数矩阵
        """
        X, _ = as_points(points)
        dim = self.chart.dim
        # grad[:, k, j] = D_k η_j
        grad = b_finite_difference(lambda P: self.contraction_values(vector, P), self.chart, X, step)
        result = grad - np.swapaxes(grad, 1, 2)
        d_omega = self.closedness_form
        if not d_omega.is_zero:
            V = vector.b_components(X)
            for (a, b, c), expr in d_omega.terms:
                values = expr.evaluate(X)
                # ι_V(e^a∧e^b∧e^c) = V_a e^b∧e^c - V_b e^a∧e^c + V_c e^a∧e^b
                for (i, j), coeff in (((b, c), V[:, a]), ((a, c), -V[:, b]), ((a, b), V[:, c])):
                    result[:, i, j] += values * coeff
                    result[:, j, i] -= values * coeff
        return result

    @cached_property
    def closedness_form(self):
        if self.chart.dim < 3:
            return BForm.zero(self.chart, 2)
        return exterior_d(self.omega)

    def residue_split(self):
        return residue_split(self.omega)


class BracketField(ScalarField):
    """
    逐点泊松括号 {f, g} = df^T P dg

    b-微分用精确的乘积法则：
    D_k{f,g} = (D_k df)^T P dg + df^T (D_k P) dg + df^T P (D_k dg)。
    """

    is_symbolic = False

    def __init__(self, structure, f, g):
        self.structure = structure
        self.f = f
        self.g = g

    def value(self, chart, points):
        return self.structure.bracket_values(self.f, self.g, points)

    def b_differential_at(self, chart, points):
        X, _ = as_points(points)
        S = self.structure
        P = S.poisson_matrix(X)
        dP = S.poisson_matrix_derivative(X, P)
        df = self.f.b_differential_at(S.chart, X)
        dg = self.g.b_differential_at(S.chart, X)
        hf = self.f.b_hessian_at(S.chart, X)
        hg = self.g.b_hessian_at(S.chart, X)
        return (
            np.einsum("nki,nij,nj->nk", hf, P, dg)
            + np.einsum("ni,nkij,nj->nk", df, dP, dg)
            + np.einsum("ni,nij,nkj->nk", df, P, hg)
        )

    def __repr__(self):
        return f"{{{self.f}, {self.g}}}"


@dataclass(frozen=True)
class ResidueSplit:
    """
    ω = dt/t ∧ α + β 的分解

    Args:
        residue: α 在 Z 上的限制（不含 dt/t 槽位）
        smooth_part: β（不含 dt/t 槽位）
    """

    residue: BForm
    smooth_part: BForm

    def reconstruct(self):
        """dt/t ∧ α + β"""
        chart = self.smooth_part.chart
        if chart.t_index is None or self.residue.is_zero:
            return self.smooth_part
        return wedge(BForm.dlog_t(chart), self.residue) + self.smooth_part


def residue_split(omega):
    """
    留数/光滑部分分解

    α 取含槽位 0 的多重指标的系数并限制到 t = 0，β 取其余项；
    光滑形式的留数为 0。
    """
    chart = omega.chart
    if omega.degree == 0 or chart.t_index is None:
        return ResidueSplit(BForm.zero(chart, max(omega.degree - 1, 0)), omega)
    singular, smooth = [], []
    for index, expr in omega.terms:
        if index[0] == 0:
            singular.append((index[1:], expr.substitute(chart.t_index, 0.0)))
        else:
            smooth.append((index, expr))
    return ResidueSplit(
        BForm(chart, omega.degree - 1, tuple(singular)),
        BForm(chart, omega.degree, tuple(smooth)),
    )


def hamiltonian_field(structure, f):
    return structure.hamiltonian_field(f)


def poisson_bracket(structure, f, g):
    return structure.bracket(f, g)


def jacobi_residual(structure, f, g, h, points):
    return structure.jacobi_residual(f, g, h, points)


def verify_bsymplectic(omega, bulk_points, z_points=None, det_tol=DEFAULT_DET_TOL, closed_tol=1e-12):
    """
    校验 b-辛条件：dω = 0，Ω 在所有采样点（含 Z 上网格）非退化，
    并报告 Z 是否为真正的临界超曲面（dt/t 行在 Z 上不恒为 0）

    Args:
        omega: 2 次 b-形式
        bulk_points: 区域内采样点
        z_points: Z 上采样点
        det_tol: 相对行列式阈值
        closed_tol: dω 系数允许的最大值

    Returns:
        Report: 不抛出异常，失败记录在报告中
    """
    chart = omega.chart
    X = np.asarray(bulk_points, dtype=float).reshape(-1, chart.dim)
    Z = np.zeros((0, chart.dim)) if z_points is None else np.asarray(z_points, dtype=float).reshape(-1, chart.dim)
    points = np.vstack([X, Z])
    report = Report(title="b-symplectic")

    if chart.dim < 3:
        report.add(CheckResult("closed", points.shape[0], 0.0, True, detail={"structural": True}))
    else:
        d_omega = exterior_d(omega)
        residual = d_omega.max_abs(points) if points.shape[0] else 0.0
        report.add(CheckResult(
            "closed", points.shape[0], residual, d_omega.is_zero or residual < closed_tol,
            detail={"structural": d_omega.is_zero},
        ))

    dets = relative_det(omega.matrix(points)) if points.shape[0] else np.zeros(0)
    bad = dets <= det_tol
    witness = points[np.argmax(bad)].tolist() if np.any(bad) else None
    report.add(CheckResult(
        "nondegenerate", points.shape[0], float(np.min(dets)) if dets.size else float("nan"),
        not np.any(bad), witness=witness,
        detail={"failures": int(np.sum(bad)), "on_z_failures": int(np.sum(bad[X.shape[0]:]))},
    ))

    flags = []
    if chart.t_index is None or Z.shape[0] == 0:
        flags.append("Z not critical")
    else:
        row = omega.matrix(Z)[:, 0, :]
        if np.max(np.abs(row)) == 0.0:
            flags.append("Z not critical")
    report.data["flags"] = flags
    if flags:
        logger.info("b-辛校验: %s", ", ".join(flags))
    return report
