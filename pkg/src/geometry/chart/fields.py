#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
标量场协议模块
负责标量场的统一接口、b-标架下的有限差分，以及由数值过程定义的标量场
"""

from abc import ABC, abstractmethod

import numpy as np

DEFAULT_FD_STEP = 1e-6


def as_points(points):
    """
    把点或点集统一成 (N, dim) 浮点数组

    Returns:
        tuple: (X, single) single 表示输入是单个点
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        return X[None, :], True
    return X, False


def wrap_difference(delta):
    """周期坐标差值折回 [-0.5, 0.5)"""
    return (delta + 0.5) % 1.0 - 0.5


def b_shifted(chart, points, slot, step):
    """
    沿 b-标架方向平移采样点

    slot 0（t 方向）按乘法步长 t*exp(±h) 平移，等价于对 log|t| 做差分；
    t = 0 处两侧重合，t*∂_t 的差分值为 0。

    Returns:
        tuple: (plus, minus) 两组点
    """
    coord = chart.slot_coords[slot]
    plus = np.array(points, dtype=float, copy=True)
    minus = np.array(points, dtype=float, copy=True)
    if slot == 0 and chart.t_index is not None:
        plus[:, coord] *= np.exp(step)
        minus[:, coord] *= np.exp(-step)
    else:
        plus[:, coord] += step
        minus[:, coord] -= step
    return plus, minus


def b_finite_difference(fn, chart, points, step=DEFAULT_FD_STEP, periodic=False):
    """
    中心差分计算 b-微分 (D_0 f, D_1 f, ...)，D_0 = t∂_t，其余为坐标偏导

    Args:
        fn: 点集 -> 值 (N,) 或 (N, ...) 的函数
        chart: 图卡
        points: (N, dim)
        step: 差分步长
        periodic: 值是否取在 R/Z 中（差值需折回）

    Returns:
        ndarray: (N, dim, ...) 最后的维度与 fn 的输出一致
    """
    X, _ = as_points(points)
    columns = []
    for slot in range(chart.dim):
        plus, minus = b_shifted(chart, X, slot, step)
        delta = np.asarray(fn(plus)) - np.asarray(fn(minus))
        if periodic:
            delta = wrap_difference(delta)
        columns.append(delta / (2.0 * step))
    return np.stack(columns, axis=1)


class ScalarField(ABC):
    """
    标量场接口

    所有实现都按图卡坐标顺序接受 (N, dim) 的点集；
    b-微分按槽位顺序返回（槽位 0 为 dt/t，其余为 dx_i）。
    """

    periodic = False

    @abstractmethod
    def value(self, chart, points):
        """
        求值

        Returns:
            ndarray: (N,)
        """

    @abstractmethod
    def b_differential_at(self, chart, points):
        """
        b-余切标架下的微分分量

        Returns:
            ndarray: (N, dim)
        """

    def b_hessian_at(self, chart, points, step=1e-5):
        """
        b-二阶导数 D_j D_i f，缺省对 b-微分做有限差分

        Returns:
            ndarray: (N, dim, dim)，[:, j, i] = D_j D_i f
        """
        return b_finite_difference(
            lambda P: self.b_differential_at(chart, P), chart, points, step
        )

    def __call__(self, chart, points):
        X, single = as_points(points)
        values = self.value(chart, X)
        return float(values[0]) if single else values


class NumericField(ScalarField):
    """
    由数值过程（积分、打靶、插值）定义的光滑标量场

    b-微分用 b-标架中心差分计算；周期场（角坐标）取值在 [0, 1)。
    """

    def __init__(self, fn, name="", periodic=False, step=DEFAULT_FD_STEP):
        """
        Args:
            fn: (N, dim) -> (N,) 的求值函数
            name: 名称
            periodic: 是否为 R/Z 值
            step: 差分步长
        """
        self.fn = fn
        self.name = name
        self.periodic = periodic
        self.step = step

    def value(self, chart, points):
        X, _ = as_points(points)
        values = np.asarray(self.fn(X), dtype=float).reshape(X.shape[0])
        if self.periodic:
            values = np.mod(values, 1.0)
        return values

    def b_differential_at(self, chart, points):
        return b_finite_difference(
            lambda P: self.value(chart, P), chart, points, self.step, self.periodic
        )

    def __repr__(self):
        return f"NumericField({self.name or self.fn!r})"
