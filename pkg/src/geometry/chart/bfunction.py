#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
b-函数模块
负责形如 c*log|t| + g 的 b-函数的表示、求值、b-微分与序列化
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.geometry.chart.expressions import ZERO, Const, Coord, SmoothField, add, as_field, exp, from_json, mul
from src.geometry.chart.fields import ScalarField, as_points
from src.utils.errors import ChartError, DescriptorError, NotABFunctionError


@dataclass(frozen=True)
class BFunction(ScalarField):
    """
    b-函数 f = c*(log|t| + shift) + g

    Args:
        c: 奇异系数；c = 0 时 f 是光滑函数
        g: 光滑部分
        shift: 定义函数的对数修正，定义函数为 exp(shift)*t

    shift 只在正规形变换后非零：f_1 = log|exp(h)*t'| 记为 c = 1, g = 0, shift = h，
    从而在表达式层面 f_1 就是 log|t|。
    """

    c: float = 0.0
    g: SmoothField = ZERO
    shift: SmoothField = ZERO

    __array_ufunc__ = None
    is_symbolic = True

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "g", as_field(self.g))
        object.__setattr__(self, "shift", as_field(self.shift))

    # ---- 构造 ----
    @classmethod
    def smooth(cls, g):
        return cls(0.0, as_field(g))

    @classmethod
    def log_t(cls, c=1.0, g=ZERO):
        return cls(float(c), as_field(g))

    @classmethod
    def from_log_expansion(cls, log_coefficient, rest):
        """
        由 "系数*log|t| + 余项" 的展开构造 b-函数

        Args:
            log_coefficient: log|t| 的系数表达式（折叠后必须是常数）
            rest: 光滑余项

        Raises:
            NotABFunctionError: log 系数不是常数
        """
        coefficient = as_field(log_coefficient)
        if not isinstance(coefficient, Const):
            raise NotABFunctionError(
                f"log|t| 的系数 {coefficient} 不是常数，不能延拓为 b-函数"
            )
        return cls(coefficient.value_, as_field(rest))

    # ---- 性质 ----
    @property
    def is_smooth(self):
        return self.c == 0.0

    @cached_property
    def smooth_part(self):
        """c*shift + g"""
        return add(mul(self.c, self.shift), self.g)

    def defining_function(self, chart):
        """定义函数 exp(shift)*t"""
        if chart.t_index is None:
            raise ChartError("图卡没有 t 坐标")
        return mul(exp(self.shift), Coord(chart.t_index))

    # ---- 求值 ----
    def _log_part(self, chart, X):
        if self.c == 0.0:
            return np.zeros(X.shape[0])
        if chart.t_index is None:
            raise ChartError("奇异系数非零的 b-函数需要带 t 坐标的图卡")
        with np.errstate(divide="ignore"):
            return self.c * np.log(np.abs(X[:, chart.t_index]))

    def value(self, chart, points):
        """
        c*log|t| + (c*shift + g)；c != 0 时在 t = 0 处取 ±inf
        """
        X, _ = as_points(points)
        return self._log_part(chart, X) + self.smooth_part.evaluate(X)

    @cached_property
    def _b_differentials(self):
        return {}

    def b_differential(self, chart):
        """
        b-余切标架系数（表达式）：槽位 0 为 c + t*∂_t(光滑部分)
        """
        key = (chart.t_index, chart.dim)
        cache = self._b_differentials
        if key not in cache:
            smooth = self.smooth_part.b_differential(chart)
            if chart.t_index is None:
                if self.c != 0.0:
                    raise ChartError("奇异系数非零的 b-函数需要带 t 坐标的图卡")
                cache[key] = smooth
            else:
                cache[key] = (add(self.c, smooth[0]),) + tuple(smooth[1:])
        return cache[key]

    def b_differential_at(self, chart, points):
        X, _ = as_points(points)
        return np.stack([d.evaluate(X) for d in self.b_differential(chart)], axis=1)

    def b_hessian_at(self, chart, points, step=None):
        return self.smooth_part.b_hessian_at(chart, points)

    # ---- 代数 ----
    def __add__(self, other):
        if isinstance(other, BFunction):
            if self.shift == other.shift:
                return BFunction(self.c + other.c, add(self.g, other.g), self.shift)
            return BFunction(self.c + other.c, add(self.smooth_part, other.smooth_part))
        return BFunction(self.c, add(self.g, other), self.shift)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, (SmoothField, BFunction)):
            raise TypeError("b-函数只支持与常数相乘")
        k = float(scalar)
        if k == 0.0:
            return BFunction()
        return BFunction(self.c * k, mul(k, self.g), self.shift)

    __rmul__ = __mul__

    # ---- 序列化 ----
    def to_json(self):
        data = {"c": self.c, "g_expr": self.g.to_json()}
        if self.shift != ZERO:
            data["shift"] = self.shift.to_json()
        return data

    @classmethod
    def from_json(cls, data, box=None):
        """
        Args:
            box: 图卡区域盒，给出时重新证明 log 节点的正性

        Raises:
            DescriptorError: 缺少 c 或 g_expr
            CertificateError: log 子表达式在 box 上不能证明为正
        """
        if not isinstance(data, dict) or "g_expr" not in data:
            raise DescriptorError(f"b-函数描述格式错误: {data!r}")
        try:
            c = float(data.get("c", 0.0))
        except (TypeError, ValueError) as e:
            raise DescriptorError(f"b-函数系数 c 不合法: {data.get('c')!r}") from e
        shift = from_json(data["shift"], box) if "shift" in data else ZERO
        return cls(c, from_json(data["g_expr"], box), shift)

    def to_string(self, names=None, t_name="t"):
        parts = []
        if self.c != 0.0:
            log_arg = t_name if self.shift == ZERO else f"exp({self.shift.to_string(names)})*{t_name}"
            parts.append(f"{self.c!r}*log|{log_arg}|")
        if self.g != ZERO or not parts:
            parts.append(self.g.to_string(names))
        return " + ".join(parts)

    def __str__(self):
        return self.to_string()
