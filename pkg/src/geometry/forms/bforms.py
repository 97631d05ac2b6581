#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
b-形式与 b-向量场模块
负责 b-余切标架 (dt/t, dx_1, ...) 下的外代数：楔积、外微分、缩并、配对，
以及 b-标架 (t∂_t, ∂_x1, ...) 下的向量场
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import ZERO, Const, Coord, SmoothField, add, as_field, from_json, mul
from src.geometry.chart.fields import as_points
from src.utils.errors import DegreeError, DescriptorError, DomainError

logger = logging.getLogger(__name__)


def _is_zero(expr):
    return isinstance(expr, Const) and expr.value_ == 0.0


def _merge_sign(first, second):
    """升序多重指标 first、second 拼接后排序所需置换的符号；有重复时返回 0"""
    if set(first) & set(second):
        return 0
    inversions = sum(1 for a in first for b in second if a > b)
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class BForm:
    """
    k 次 b-形式

    Args:
        chart: 图卡
        degree: 次数 k
        terms: ((升序槽位元组, 系数表达式), ...)，只存非零项

    槽位 0 是 dt/t；dt 从不直接存储，总是写成 t*(dt/t)。
    """

    chart: Chart
    degree: int
    terms: tuple = ()

    __array_ufunc__ = None

    def __post_init__(self):
        if not 0 <= self.degree <= self.chart.dim:
            raise DegreeError(f"b-形式次数 {self.degree} 超出 [0, {self.chart.dim}]")
        collected = {}
        for index, expr in self.terms:
            index = tuple(int(i) for i in index)
            if len(index) != self.degree or list(index) != sorted(set(index)):
                raise DegreeError(f"多重指标 {index} 不是长度为 {self.degree} 的升序指标")
            if index[-1:] and index[-1] >= self.chart.dim:
                raise DegreeError(f"多重指标 {index} 越界")
            collected[index] = add(collected.get(index, ZERO), expr)
        cleaned = tuple(sorted((i, e) for i, e in collected.items() if not _is_zero(e)))
        object.__setattr__(self, "terms", cleaned)

    # ---- 构造 ----
    @classmethod
    def from_dict(cls, chart, degree, coefficients):
        return cls(chart, degree, tuple((tuple(i), as_field(e)) for i, e in coefficients.items()))

    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree)

    @classmethod
    def function(cls, chart, expr):
        return cls(chart, 0, (((), as_field(expr)),))

    @classmethod
    def dlog_t(cls, chart):
        """dt/t"""
        if chart.t_index is None:
            raise DegreeError("图卡没有 t 坐标，dt/t 无定义")
        return cls(chart, 1, (((0,), Const(1.0)),))

    @classmethod
    def dcoord(cls, chart, coord_index):
        """坐标微分 dx；对 t 坐标返回 t*(dt/t)"""
        slot = chart.coord_slots[coord_index]
        if coord_index == chart.t_index:
            return cls(chart, 1, (((0,), Coord(coord_index)),))
        return cls(chart, 1, (((slot,), Const(1.0)),))

    @classmethod
    def differential(cls, chart, f):
        """
        b-函数或光滑场的 b-微分：系数 (c + t*∂g/∂t, ∂g/∂x_1, ...)
        """
        if isinstance(f, BFunction):
            components = f.b_differential(chart)
        else:
            components = as_field(f).b_differential(chart)
        return cls(chart, 1, tuple(((slot,), c) for slot, c in enumerate(components)))

    # ---- 访问 ----
    @cached_property
    def coefficients(self):
        return dict(self.terms)

    def coefficient(self, index):
        return self.coefficients.get(tuple(index), ZERO)

    @property
    def is_zero(self):
        return not self.terms

    def values(self, points):
        """
        Returns:
            dict: 多重指标 -> (N,) 系数值
        """
        X, _ = as_points(points)
        return {index: expr.evaluate(X) for index, expr in self.terms}

    def matrix(self, points):
        """
        2-形式的反对称系数矩阵 Ω，ω(U, V) = U^T Ω V

        Returns:
            ndarray: (N, dim, dim)
        """
        if self.degree != 2:
            raise DegreeError("只有 2-形式有系数矩阵")
        X, _ = as_points(points)
        dim = self.chart.dim
        omega = np.zeros((X.shape[0], dim, dim))
        for (i, j), expr in self.terms:
            values = expr.evaluate(X)
            omega[:, i, j] = values
            omega[:, j, i] = -values
        return omega

    def max_abs(self, points):
        X, _ = as_points(points)
        if self.is_zero:
            return 0.0
        return float(max(np.max(np.abs(v)) for v in self.values(X).values()))

    # ---- 代数 ----
    def _check_same(self, other):
        if other.chart != self.chart or other.degree != self.degree:
            raise DegreeError("只能对同一图卡上同次数的 b-形式做加法")

    def __add__(self, other):
        self._check_same(other)
        return BForm(self.chart, self.degree, self.terms + other.terms)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        """乘以常数或光滑函数"""
        factor = as_field(factor)
        return BForm(self.chart, self.degree, tuple((i, mul(factor, e)) for i, e in self.terms))

    __mul__ = scale
    __rmul__ = scale

    def at_z(self):
        """系数在 t = 0 处取值（仍按图卡坐标表示）"""
        t = self.chart.t_index
        if t is None:
            return self
        return BForm(self.chart, self.degree, tuple((i, e.substitute(t, 0.0)) for i, e in self.terms))

    def remap(self, chart, coord_map):
        """
        坐标重新编号后的同一形式

        Args:
            chart: 新图卡（t 坐标必须对应）
            coord_map: {旧坐标编号: 新坐标编号}
        """
        slot_map = {
            self.chart.coord_slots[old]: chart.coord_slots[new] for old, new in coord_map.items()
        }
        terms = []
        for index, expr in self.terms:
            moved = [slot_map[s] for s in index]
            order = sorted(range(len(moved)), key=lambda k: moved[k])
            sign = _permutation_sign(order)
            terms.append((tuple(sorted(moved)), mul(sign, expr.remap(coord_map))))
        return BForm(chart, self.degree, tuple(terms))

    # ---- 序列化 ----
    def to_json(self):
        return {
            "degree": self.degree,
            "terms": [{"slots": list(i), "expr": e.to_json()} for i, e in self.terms],
        }

    @classmethod
    def from_json(cls, chart, data):
        """
        Raises:
            DescriptorError: 格式错误或多重指标不合法
            CertificateError: 系数中的 log 子表达式在图卡区域上不能证明为正
        """
        try:
            degree = int(data["degree"])
            terms = tuple((tuple(t["slots"]), from_json(t["expr"], chart.box)) for t in data["terms"])
            return cls(chart, degree, terms)
        except DomainError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise DescriptorError(f"b-形式描述不合法: {e}") from e

    def to_string(self):
        if self.is_zero:
            return "0"
        names = self.chart.names
        slot_names = self.chart.slot_names
        parts = []
        for index, expr in self.terms:
            basis = "∧".join(slot_names[s] for s in index)
            parts.append(f"{expr.to_string(names)}*{basis}" if basis else expr.to_string(names))
        return " + ".join(parts)

    def __str__(self):
        return self.to_string()


def _permutation_sign(order):
    order = list(order)
    sign = 1
    for i in range(len(order)):
        while order[i] != i:
            j = order[i]
            order[i], order[j] = order[j], order[i]
            sign = -sign
    return sign


def wedge(a, b):
    """
    楔积 a∧b，满足 a∧b = (-1)^{jk} b∧a

    Raises:
        DegreeError: 次数之和超过维数或图卡不同
    """
    if a.chart != b.chart:
        raise DegreeError("楔积的两个 b-形式必须在同一图卡上")
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        raise DegreeError(f"楔积次数 {degree} 超过维数 {a.chart.dim}")
    terms = []
    for ia, ea in a.terms:
        for ib, eb in b.terms:
            sign = _merge_sign(ia, ib)
            if sign:
                terms.append((tuple(sorted(ia + ib)), mul(sign, ea, eb)))
    return BForm(a.chart, degree, tuple(terms))


def exterior_d(form):
    """
    b-外微分 d(Σ ω_I e^I) = Σ_I Σ_j D_j(ω_I) e^j∧e^I

    D_0 = t∂_t，其余 D_j 为坐标偏导；基底 e^j 都是闭的。

    Raises:
        DegreeError: 次数已经等于维数
    """
    chart = form.chart
    if form.degree >= chart.dim:
        raise DegreeError(f"{form.degree} 次形式在 {chart.dim} 维图卡上没有外微分")
    terms = []
    for index, expr in form.terms:
        for slot in range(chart.dim):
            sign = _merge_sign((slot,), index)
            if not sign:
                continue
            derivative = expr.b_derivative(chart, slot)
            if not _is_zero(derivative):
                terms.append((tuple(sorted((slot,) + index)), mul(sign, derivative)))
    return BForm(chart, form.degree + 1, tuple(terms))


def d_of_b_coefficients(chart, coefficients):
    """
    系数为 b-函数的形式 Σ f_I e^I 的外微分 Σ df_I ∧ e^I

    例如 log|a| dθ + Σ y_i dx_i 的外微分是 (da/a)∧dθ + Σ dy_i∧dx_i。

    Args:
        chart: 图卡
        coefficients: {升序槽位元组: BFunction 或光滑场}
    """
    result = None
    for index, f in coefficients.items():
        basis = BForm(chart, len(index), ((tuple(index), Const(1.0)),))
        term = wedge(BForm.differential(chart, f), basis)
        result = term if result is None else result + term
    if result is None:
        degree = len(next(iter(coefficients), ()))
        return BForm.zero(chart, degree + 1)
    return result


def contract(vector, form):
    """
    内积 ι_V ω（V 为符号 b-向量场）

    ι_V e^I = Σ_p (-1)^p V_{I_p} e^{I \\ I_p}
    """
    if form.degree == 0:
        raise DegreeError("0-形式不能做内积")
    terms = []
    for index, expr in form.terms:
        for p, slot in enumerate(index):
            component = vector.components[slot]
            if _is_zero(component):
                continue
            rest = index[:p] + index[p + 1:]
            terms.append((rest, mul(-1.0 if p % 2 else 1.0, component, expr)))
    return BForm(form.chart, form.degree - 1, tuple(terms))


def pair(form, vectors, points):
    """
    多线性反对称配对 ω(V_1, ..., V_k)

    ⟨dt/t, t∂_t⟩ = 1，⟨dx_i, ∂_xj⟩ = δ_ij；在 t = 0 处同样有限。

    Args:
        form: k 次 b-形式
        vectors: k 个 b-向量场，或 (N, dim) / (dim,) 的槽位分量数组
        points: 求值点

    Returns:
        float 或 ndarray(N,)
    """
    X, single = as_points(points)
    if len(vectors) != form.degree:
        raise DegreeError(f"{form.degree} 次形式需要 {form.degree} 个向量")
    arrays = []
    for v in vectors:
        if isinstance(v, (BVectorField, PointwiseVectorField)):
            arrays.append(v.b_components(X))
        else:
            arrays.append(np.broadcast_to(np.asarray(v, dtype=float), (X.shape[0], form.chart.dim)))
    total = np.zeros(X.shape[0])
    for index, expr in form.terms:
        if index:
            block = np.stack([a[:, list(index)] for a in arrays], axis=1)
            total += expr.evaluate(X) * np.linalg.det(block)
        else:
            total += expr.evaluate(X)
    return float(total[0]) if single else total


class VectorFieldMixin:
    """b-向量场的公共接口：槽位分量与诱导的光滑分量"""

    def smooth_components(self, points):
        """
        诱导光滑向量场在坐标顺序下的分量；t 分量为 t*v_0，在 Z 上恰为 0

        Returns:
            ndarray: (N, dim) 或 (dim,)
        """
        X, single = as_points(points)
        out = self.chart.to_smooth(self.b_components(X), X)
        return out[0] if single else out

    def apply(self, f, points):
        """V(f) = Σ v_j D_j f"""
        X, single = as_points(points)
        values = np.sum(self.b_components(X) * f.b_differential_at(self.chart, X), axis=1)
        return float(values[0]) if single else values


@dataclass(frozen=True)
class BVectorField(VectorFieldMixin):
    """
    b-标架下系数为光滑表达式的向量场

    Args:
        chart: 图卡
        components: 槽位顺序的系数 (v_0, v_1, ...)
    """

    chart: Chart
    components: tuple

    def __post_init__(self):
        components = tuple(as_field(c) for c in self.components)
        if len(components) != self.chart.dim:
            raise DegreeError("b-向量场系数个数与维数不一致")
        object.__setattr__(self, "components", components)

    def b_components(self, points):
        X, _ = as_points(points)
        return np.stack([c.evaluate(X) for c in self.components], axis=1)

    def __add__(self, other):
        return BVectorField(self.chart, tuple(add(a, b) for a, b in zip(self.components, other.components)))

    def scale(self, factor):
        factor = as_field(factor)
        return BVectorField(self.chart, tuple(mul(factor, c) for c in self.components))

    def to_string(self):
        frame = []
        for slot, coord in enumerate(self.chart.slot_coords):
            name = self.chart.names[coord]
            frame.append(f"{name}∂_{name}" if slot == 0 and self.chart.t_index is not None else f"∂_{name}")
        parts = [
            f"{c.to_string(self.chart.names)}*{basis}"
            for c, basis in zip(self.components, frame) if not _is_zero(c)
        ]
        return " + ".join(parts) or "0"

    def __str__(self):
        return self.to_string()


class PointwiseVectorField(VectorFieldMixin):
    """
    逐点数值求解得到的 b-向量场（系数矩阵非常数时的哈密顿场、一致化场等）

    Args:
        chart: 图卡
        fn: (N, dim) -> (N, dim) 槽位分量
        name: 名称
    """

    def __init__(self, chart, fn, name=""):
        self.chart = chart
        self.fn = fn
        self.name = name

    def b_components(self, points):
        X, _ = as_points(points)
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape[0], self.chart.dim)

    def __repr__(self):
        return f"PointwiseVectorField({self.name})"


def basis_combinations(dim, degree):
    """所有升序多重指标"""
    return list(combinations(range(dim), degree))
