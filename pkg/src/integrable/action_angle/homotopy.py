#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
同伦算子模块
负责沿径向收缩 φ_τ(b) = τ·b 的积分 I(α) = ∫_0^1 φ_τ*(ι_{ξ_τ} α) dτ，
被积函数取已缩并形式 Σ_{j>=2} λ^j(τb)·b_j（1/τ 与拉回因子 τ 解析抵消）
"""

import logging

import numpy as np

from src.utils.errors import QuadratureError

logger = logging.getLogger(__name__)


class HomotopyOperator:
    """
    Gauss-Legendre 求积的同伦算子

    只对作用型坐标 b_2..b_r 收缩（b_1 = t 的分量要求 λ^1 = 0，否则 1/τ 奇性不抵消）。
    收敛判据：nodes 点与 nodes/2 点规则之差。
    """

    def __init__(self, nodes=32, tol=1e-7, singular_tol=1e-6):
        """
        Args:
            nodes: 求积节点数
            tol: 两种求积规则的允许差
            singular_tol: 允许的 |λ^1| 上限
        """
        if nodes < 2:
            raise QuadratureError("求积节点数至少为 2")
        self.nodes = nodes
        self.tol = tol
        self.singular_tol = singular_tol
        self._rules = {n: self._rule(n) for n in (nodes, max(nodes // 2, 1))}

    @classmethod
    def from_config(cls, action_angle_config):
        return cls(nodes=int(action_angle_config.get("quadrature_nodes", 32)))

    @staticmethod
    def _rule(n):
        x, w = np.polynomial.legendre.leggauss(n)
        # [-1, 1] -> [0, 1]
        return 0.5 * (x + 1.0), 0.5 * w

    def retraction(self, b, tau):
        """φ_τ(b) = τ·b；τ = 1 为恒等，τ = 0 落到不动点集 {b = 0}"""
        return tau * np.atleast_2d(b)

    def _quadrature(self, coefficients, b, n):
        tau, weights = self._rules[n]
        b = np.atleast_2d(np.asarray(b, dtype=float))
        total = np.zeros(b.shape[0])
        singular = 0.0
        for node, weight in zip(tau, weights):
            lam = np.atleast_2d(coefficients(self.retraction(b, node)))
            singular = max(singular, float(np.max(np.abs(lam[:, 0]))))
            total += weight * np.sum(lam[:, 1:] * b[:, 1:], axis=1)
        return total, singular

    def integrate(self, coefficients, b):
        """
        I(λ)(b) = ∫_0^1 Σ_{j>=2} λ^j(τ b) b_j dτ

        Args:
            coefficients: (N, r) 横截值 -> (N, r) 系数行 λ(b)
            b: (N, r) 横截值 (t, a_2, ..., a_r)

        Returns:
            ndarray: (N,)

        Raises:
            QuadratureError: 两种求积规则结果不一致（被积函数不够光滑）
        """
        fine, singular = self._quadrature(coefficients, b, self.nodes)
        if singular > self.singular_tol:
            logger.warning("系数的 t 分量 %.3g 未归零，1/τ 奇性不会抵消", singular)
        coarse_n = max(self.nodes // 2, 1)
        if coarse_n < self.nodes:
            coarse, _ = self._quadrature(coefficients, b, coarse_n)
            gap = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
            if gap > self.tol * max(1.0, float(np.max(np.abs(fine)))):
                raise QuadratureError(f"同伦积分未收敛：{self.nodes} 点与 {coarse_n} 点规则相差 {gap:.3g}，需要加密插值网格")
        return fine

    def _primitive_quadrature(self, two_form, b, n):
        tau, weights = self._rules[n]
        b = np.atleast_2d(np.asarray(b, dtype=float))
        total = np.zeros_like(b)
        for node, weight in zip(tau, weights):
            retracted = np.array(b, copy=True)
            retracted[:, 1:] *= node
            B = np.asarray(two_form(retracted), dtype=float)
            # Σ_{i>=2} B_ik(t, τa)·a_i
            contracted = np.einsum("ni,nik->nk", b[:, 1:], B[:, 1:, :])
            contracted[:, 1:] *= node
            total += weight * contracted
        return total

    def primitive(self, two_form, b):
        """
        横截值空间上闭 2-形式 β 的原函数 γ（dγ = β），t 保持不动、只收缩 a_2..a_r

        γ_t = ∫ Σ_i β_{it}(t, τa) a_i dτ，γ_k = ∫ τ Σ_i β_{ik}(t, τa) a_i dτ（k >= 2）

        Args:
            two_form: (N, r) 横截值 -> (N, r, r) 反对称系数矩阵，
                第 0 行列对应 dt/t
            b: (N, r) 横截值

        Returns:
            ndarray: (N, r)

        Raises:
            QuadratureError: 两种求积规则结果不一致
        """
        fine = self._primitive_quadrature(two_form, b, self.nodes)
        coarse_n = max(self.nodes // 2, 1)
        if coarse_n < self.nodes and fine.size:
            coarse = self._primitive_quadrature(two_form, b, coarse_n)
            gap = float(np.max(np.abs(fine - coarse)))
            if gap > self.tol * max(1.0, float(np.max(np.abs(fine)))):
                raise QuadratureError(f"截面修正积分未收敛：{self.nodes} 点与 {coarse_n} 点规则相差 {gap:.3g}")
        return fine
