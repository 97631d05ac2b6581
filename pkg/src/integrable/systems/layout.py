#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
标准模型布局模块
负责识别 T^r × B^s 标准模型中的角坐标、作用型坐标 (t, a_2, ..., a_r) 与横截坐标
"""

from dataclasses import dataclass

import numpy as np

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import ZERO, Coord
from src.geometry.forms.bforms import BForm
from src.utils.errors import InputContractError


def _coordinate_of(f):
    """积分恰为某个坐标时返回其编号"""
    g = f.g if isinstance(f, BFunction) and f.c == 0.0 and f.shift == ZERO else f
    return g.index if isinstance(g, Coord) else None


@dataclass(frozen=True)
class StandardModelLayout:
    """
    Args:
        angle_coords: r 个周期坐标编号
        action_coords: (t, a_2, ..., a_r) 的坐标编号
        transverse_coords: 非交换部分积分对应的坐标编号
    """

    angle_coords: tuple
    action_coords: tuple
    transverse_coords: tuple

    @property
    def rank(self):
        return len(self.action_coords)

    @classmethod
    def detect(cls, system):
        """
        要求 f_1 = log|t|（t 为图卡的 t 坐标），f_2..f_s 都是坐标，
        且图卡恰有 r 个周期坐标

        Raises:
            InputContractError: 系统不是标准模型形式
        """
        chart = system.chart
        r = system.rank
        if r == 0:
            raise InputContractError("秩为 0 的系统没有 Liouville 环面")
        first = system.integrals[0]
        if chart.t_index is None or not (
            isinstance(first, BFunction) and first.c == 1.0 and first.g == ZERO and first.shift == ZERO
        ):
            raise InputContractError("f_1 必须恰为 log|t|（先做正规形）")
        coords = [chart.t_index]
        for k, f in enumerate(system.integrals[1:], start=2):
            index = _coordinate_of(f)
            if index is None:
                raise InputContractError(f"f_{k} 不是图卡坐标，系统不是标准模型形式")
            coords.append(index)
        angles = tuple(i for i, p in enumerate(chart.periodic) if p)
        if len(angles) != r or set(angles) & set(coords) or len(set(coords)) != len(coords):
            raise InputContractError("周期坐标个数与秩不符，或积分坐标重复")
        return cls(angles, tuple(coords[:r]), tuple(coords[r:]))

    def action_values(self, points):
        """b(p) = (t, a_2, ..., a_r)，(N, r)"""
        return np.atleast_2d(points)[:, list(self.action_coords)]

    def section(self, points):
        """默认截面：把角坐标置 0"""
        X = np.array(np.atleast_2d(points), dtype=float, copy=True)
        X[:, list(self.angle_coords)] = 0.0
        return X

    def base_point(self, center, b):
        """截面上横截值为 b 的点（其余坐标取 center 的值）"""
        point = np.array(center, dtype=float, copy=True)
        point[list(self.angle_coords)] = 0.0
        point[list(self.action_coords)] = b
        return point


def standard_model_names(r, s):
    """(theta1..thetar, t, a2..ar, p1, q1, ...)"""
    if r < 1 or s < r or (s - r) % 2:
        raise InputContractError(f"(r, s) = ({r}, {s}) 不满足 r >= 1、s >= r 且 s - r 为偶数")
    names = [f"theta{i}" for i in range(1, r + 1)] + ["t"] + [f"a{i}" for i in range(2, r + 1)]
    for k in range(1, (s - r) // 2 + 1):
        names += [f"p{k}", f"q{k}"]
    return tuple(names)


def standard_model_form(r, s, c, radius=1.0):
    """
    T^r × B^s 上的正规形 c·dθ_1∧dt/t + Σ_{i>=2} dθ_i∧da_i + Σ dp_k∧dq_k

    Returns:
        tuple: (chart, omega)
    """
    names = standard_model_names(r, s)
    periodic = tuple(name.startswith("theta") for name in names)
    box = tuple((0.0, 1.0) if p else (-radius, radius) for p in periodic)
    chart = Chart(names, t_index=r, box=box, periodic=periodic)
    slot = {name: chart.coord_slots[i] for i, name in enumerate(names)}
    # c·dθ_1∧dt/t = -c·(dt/t)∧dθ_1
    terms = {(0, slot["theta1"]): -float(c)}
    for i in range(2, r + 1):
        terms[(slot[f"theta{i}"], slot[f"a{i}"])] = 1.0
    for k in range(1, (s - r) // 2 + 1):
        terms[(slot[f"p{k}"], slot[f"q{k}"])] = 1.0
    return chart, BForm.from_dict(chart, 2, terms)
