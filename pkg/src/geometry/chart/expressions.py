#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
光滑标量场表达式树模块
负责图卡坐标上的表达式（常数、坐标、+、·、幂、sin、cos、exp、log）的
构造、常数折叠、精确求导、区间算术证书、向量化求值与 JSON 序列化
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.geometry.chart.fields import ScalarField, as_points
from src.utils.errors import CertificateError, DescriptorError, DomainError


@dataclass(frozen=True)
class SmoothField(ScalarField):
    """
    表达式树节点基类

    节点不可变；结构相等即表达式相等（常数折叠后）。
    """

    # 让 numpy 标量与表达式相乘时走反射运算
    __array_ufunc__ = None
    is_symbolic = True

    # ---- 运算符 ----
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1.0, other))

    def __rsub__(self, other):
        return add(other, mul(-1.0, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(-1.0, self)

    def __truediv__(self, other):
        if isinstance(other, SmoothField):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / float(other))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1.0))

    def __pow__(self, exponent):
        return power(self, exponent)

    # ---- 缓存 ----
    @cached_property
    def _fn(self):
        return self._build()

    @cached_property
    def _diff_cache(self):
        return {}

    @cached_property
    def _b_cache(self):
        return {}

    # ---- 求值 ----
    def evaluate(self, points):
        """
        向量化求值

        Args:
            points: 单点 (dim,) 或点集 (N, dim)

        Returns:
            float 或 ndarray(N,)

        Raises:
            DomainError: log / 负幂子表达式取到非正值
        """
        X, single = as_points(points)
        values = np.broadcast_to(np.asarray(self._fn(X), dtype=float), (X.shape[0],))
        return float(values[0]) if single else np.array(values)

    def value(self, chart, points):
        X, _ = as_points(points)
        return self.evaluate(X)

    # ---- 求导 ----
    def diff(self, index):
        """
        对第 index 个图卡坐标的精确偏导（结果仍是表达式）
        """
        cache = self._diff_cache
        if index not in cache:
            cache[index] = self._diff(index)
        return cache[index]

    def gradient(self, points):
        X, single = as_points(points)
        grad = np.stack([self.diff(i).evaluate(X) for i in range(X.shape[1])], axis=1)
        return grad[0] if single else grad

    def hessian(self, points):
        X, single = as_points(points)
        dim = X.shape[1]
        hess = np.empty((X.shape[0], dim, dim))
        for i in range(dim):
            di = self.diff(i)
            for j in range(i, dim):
                hess[:, i, j] = hess[:, j, i] = di.diff(j).evaluate(X)
        return hess[0] if single else hess

    def b_derivative(self, chart, slot):
        """
        b-标架方向导数 D_slot：槽位 0 为 t∂_t，其余为坐标偏导
        """
        key = (chart.t_index, chart.dim, slot)
        cache = self._b_cache
        if key not in cache:
            coord = chart.slot_coords[slot]
            derivative = self.diff(coord)
            if slot == 0 and chart.t_index is not None:
                derivative = mul(Coord(chart.t_index), derivative)
            cache[key] = derivative
        return cache[key]

    def b_differential(self, chart):
        return tuple(self.b_derivative(chart, slot) for slot in range(chart.dim))

    def b_differential_at(self, chart, points):
        X, _ = as_points(points)
        return np.stack([d.evaluate(X) for d in self.b_differential(chart)], axis=1)

    def b_hessian_at(self, chart, points, step=None):
        X, _ = as_points(points)
        hess = np.empty((X.shape[0], chart.dim, chart.dim))
        for i, di in enumerate(self.b_differential(chart)):
            for j in range(chart.dim):
                hess[:, j, i] = di.b_derivative(chart, j).evaluate(X)
        return hess

    # ---- 结构操作 ----
    def children(self):
        return ()

    def rebuild(self, children):
        return self

    def substitute(self, index, value):
        """把坐标 index 替换为常数 value 并重新折叠"""
        return self.rebuild(tuple(c.substitute(index, value) for c in self.children()))

    def remap(self, mapping):
        """按 {旧坐标: 新坐标} 重新编号坐标"""
        return self.rebuild(tuple(c.remap(mapping) for c in self.children()))

    def variables(self):
        found = set()
        for child in self.children():
            found |= child.variables()
        return found

    @property
    def is_constant(self):
        return isinstance(self, Const)

    def certify(self, box):
        """
        用区间算术在区域 box 上为所有 log / 负幂节点给出正性证书

        Returns:
            SmoothField: self

        Raises:
            CertificateError: 证书失败
        """
        self.interval(box)
        return self

    def interval(self, box):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    def to_string(self, names=None):
        raise NotImplementedError

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class Const(SmoothField):
    value_: float

    @property
    def value_float(self):
        return self.value_

    def _build(self):
        v = self.value_
        return lambda X: np.full(X.shape[0], v)

    def _diff(self, index):
        return ZERO

    def substitute(self, index, value):
        return self

    def remap(self, mapping):
        return self

    def interval(self, box):
        return self.value_, self.value_

    def to_json(self):
        return {"op": "const", "args": [self.value_]}

    def to_string(self, names=None):
        return repr(self.value_)


@dataclass(frozen=True)
class Coord(SmoothField):
    index: int

    def _build(self):
        i = self.index
        return lambda X: X[:, i]

    def _diff(self, index):
        return ONE if index == self.index else ZERO

    def substitute(self, index, value):
        return Const(float(value)) if index == self.index else self

    def remap(self, mapping):
        return Coord(int(mapping.get(self.index, self.index)))

    def variables(self):
        return {self.index}

    def interval(self, box):
        lo, hi = box[self.index]
        return float(lo), float(hi)

    def to_json(self):
        return {"op": "coord", "args": [self.index]}

    def to_string(self, names=None):
        return names[self.index] if names else f"x{self.index}"


@dataclass(frozen=True)
class Add(SmoothField):
    terms: tuple

    def _build(self):
        fns = [t._fn for t in self.terms]

        def fn(X):
            total = fns[0](X)
            for f in fns[1:]:
                total = total + f(X)
            return total
        return fn

    def _diff(self, index):
        return add(*(t.diff(index) for t in self.terms))

    def children(self):
        return self.terms

    def rebuild(self, children):
        return add(*children)

    def interval(self, box):
        lo = hi = 0.0
        for t in self.terms:
            a, b = t.interval(box)
            lo, hi = lo + a, hi + b
        return lo, hi

    def to_json(self):
        return {"op": "add", "args": [t.to_json() for t in self.terms]}

    def to_string(self, names=None):
        return "(" + " + ".join(t.to_string(names) for t in self.terms) + ")"


@dataclass(frozen=True)
class Mul(SmoothField):
    factors: tuple

    def _build(self):
        fns = [f._fn for f in self.factors]

        def fn(X):
            total = fns[0](X)
            for f in fns[1:]:
                total = total * f(X)
            return total
        return fn

    def _diff(self, index):
        terms = []
        for k, factor in enumerate(self.factors):
            d = factor.diff(index)
            if isinstance(d, Const) and d.value_ == 0.0:
                continue
            terms.append(mul(*(d if m == k else f for m, f in enumerate(self.factors))))
        return add(*terms)

    def children(self):
        return self.factors

    def rebuild(self, children):
        return mul(*children)

    def interval(self, box):
        lo, hi = 1.0, 1.0
        for f in self.factors:
            a, b = f.interval(box)
            products = (lo * a, lo * b, hi * a, hi * b)
            lo, hi = min(products), max(products)
        return lo, hi

    def to_json(self):
        return {"op": "mul", "args": [f.to_json() for f in self.factors]}

    def to_string(self, names=None):
        return "*".join(f.to_string(names) for f in self.factors)


@dataclass(frozen=True)
class Pow(SmoothField):
    base: SmoothField
    exponent: float

    def _build(self):
        bf, e = self.base._fn, self.exponent
        integral = float(e).is_integer()

        def fn(X):
            b = bf(X)
            if e < 0 and np.any(b == 0.0):
                raise DomainError("负幂的底数为 0")
            if not integral and np.any(b < 0.0):
                raise DomainError("非整数幂的底数为负")
            return np.power(b, e)
        return fn

    def _diff(self, index):
        db = self.base.diff(index)
        if isinstance(db, Const) and db.value_ == 0.0:
            return ZERO
        return mul(self.exponent, power(self.base, self.exponent - 1.0), db)

    def children(self):
        return (self.base,)

    def rebuild(self, children):
        return power(children[0], self.exponent)

    def interval(self, box):
        lo, hi = self.base.interval(box)
        e = self.exponent
        if float(e).is_integer() and e >= 0:
            n = int(e)
            if n % 2 == 1 or lo >= 0:
                return lo ** n, hi ** n
            if hi <= 0:
                return hi ** n, lo ** n
            return 0.0, max(lo ** n, hi ** n)
        if float(e).is_integer():
            if lo <= 0.0 <= hi:
                raise CertificateError(f"负幂底数区间 [{lo}, {hi}] 含 0")
        elif lo <= 0.0:
            raise CertificateError(f"非整数幂底数区间 [{lo}, {hi}] 非正")
        ends = (lo ** e, hi ** e)
        return min(ends), max(ends)

    def to_json(self):
        return {"op": "pow", "args": [self.base.to_json(), self.exponent]}

    def to_string(self, names=None):
        return f"{self.base.to_string(names)}^{self.exponent!r}"


@dataclass(frozen=True)
class _Unary(SmoothField):
    arg: SmoothField

    op_name = ""

    def children(self):
        return (self.arg,)

    def rebuild(self, children):
        return UNARY_CONSTRUCTORS[self.op_name](children[0])

    def to_json(self):
        return {"op": self.op_name, "args": [self.arg.to_json()]}

    def to_string(self, names=None):
        return f"{self.op_name}({self.arg.to_string(names)})"


def _trig_interval(fn, lo, hi, peak_phase):
    """sin / cos 在 [lo, hi] 上的精确值域"""
    if hi - lo >= 2.0 * math.pi:
        return -1.0, 1.0
    values = [fn(lo), fn(hi)]
    # 极值点 peak_phase + k*pi
    k = math.ceil((lo - peak_phase) / math.pi)
    while peak_phase + k * math.pi <= hi:
        values.append(fn(peak_phase + k * math.pi))
        k += 1
    return min(values), max(values)


@dataclass(frozen=True)
class Sin(_Unary):
    op_name = "sin"

    def _build(self):
        af = self.arg._fn
        return lambda X: np.sin(af(X))

    def _diff(self, index):
        return mul(cos(self.arg), self.arg.diff(index))

    def interval(self, box):
        lo, hi = self.arg.interval(box)
        return _trig_interval(math.sin, lo, hi, math.pi / 2.0)


@dataclass(frozen=True)
class Cos(_Unary):
    op_name = "cos"

    def _build(self):
        af = self.arg._fn
        return lambda X: np.cos(af(X))

    def _diff(self, index):
        return mul(-1.0, sin(self.arg), self.arg.diff(index))

    def interval(self, box):
        lo, hi = self.arg.interval(box)
        return _trig_interval(math.cos, lo, hi, 0.0)


@dataclass(frozen=True)
class Exp(_Unary):
    op_name = "exp"

    def _build(self):
        af = self.arg._fn
        return lambda X: np.exp(af(X))

    def _diff(self, index):
        return mul(self, self.arg.diff(index))

    def interval(self, box):
        lo, hi = self.arg.interval(box)
        return math.exp(lo), math.exp(hi)


@dataclass(frozen=True)
class Log(_Unary):
    op_name = "log"

    def _build(self):
        af = self.arg._fn

        def fn(X):
            a = af(X)
            if np.any(a <= 0.0):
                raise DomainError("log 的子表达式取到非正值")
            return np.log(a)
        return fn

    def _diff(self, index):
        return mul(power(self.arg, -1.0), self.arg.diff(index))

    def interval(self, box):
        lo, hi = self.arg.interval(box)
        if lo <= 0.0:
            raise CertificateError(f"log 子表达式区间 [{lo}, {hi}] 不是严格正的")
        return math.log(lo), math.log(hi)


ZERO = Const(0.0)
ONE = Const(1.0)


# ---- 带常数折叠的构造函数 ----
def as_field(value):
    if isinstance(value, SmoothField):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)):
        return Const(float(value))
    raise TypeError(f"无法转换为表达式: {value!r}")


def const(value):
    return Const(float(value))


def coord(index):
    return Coord(int(index))


def add(*terms):
    flat, total = [], 0.0
    for term in terms:
        term = as_field(term)
        for item in (term.terms if isinstance(term, Add) else (term,)):
            if isinstance(item, Const):
                total += item.value_
            else:
                flat.append(item)
    if total != 0.0:
        flat.append(Const(total))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors):
    flat, coefficient = [], 1.0
    for factor in factors:
        factor = as_field(factor)
        for item in (factor.factors if isinstance(factor, Mul) else (factor,)):
            if isinstance(item, Const):
                coefficient *= item.value_
            else:
                flat.append(item)
    if coefficient == 0.0:
        return ZERO
    if coefficient != 1.0:
        flat.insert(0, Const(coefficient))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def power(base, exponent):
    base, e = as_field(base), float(exponent)
    if e == 0.0:
        return ONE
    if e == 1.0:
        return base
    if isinstance(base, Const):
        try:
            result = base.value_ ** e
        except ZeroDivisionError as exc:
            raise DomainError("常数 0 的负幂") from exc
        if isinstance(result, complex):
            raise DomainError("负常数的非整数幂")
        return Const(float(result))
    if isinstance(base, Pow) and e.is_integer():
        return power(base.base, base.exponent * e)
    return Pow(base, e)


def sin(arg):
    arg = as_field(arg)
    return Const(math.sin(arg.value_)) if isinstance(arg, Const) else Sin(arg)


def cos(arg):
    arg = as_field(arg)
    return Const(math.cos(arg.value_)) if isinstance(arg, Const) else Cos(arg)


def exp(arg):
    arg = as_field(arg)
    return Const(math.exp(arg.value_)) if isinstance(arg, Const) else Exp(arg)


def log(arg, box=None):
    """
    log 节点；给出 box 时立即用区间算术证明子表达式严格为正

    Raises:
        CertificateError: 证书失败
        DomainError: 常数参数非正
    """
    arg = as_field(arg)
    if isinstance(arg, Const):
        if arg.value_ <= 0.0:
            raise DomainError("常数的 log 参数非正")
        return Const(math.log(arg.value_))
    if box is not None:
        lo, _ = arg.interval(box)
        if lo <= 0.0:
            raise CertificateError(f"log 子表达式在区域上的下界 {lo} 不是严格正的")
    return Log(arg)


UNARY_CONSTRUCTORS = {"sin": sin, "cos": cos, "exp": exp, "log": log}


def from_json(data, box=None):
    """
    从 {op, args} JSON 结构重建表达式（经常数折叠规范化）

    给出 box 时 log 节点在该区域上重新取得正性证书。

    Raises:
        DescriptorError: 结构不合法
        CertificateError: log 子表达式在 box 上不能证明为正
    """
    if not isinstance(data, dict) or "op" not in data or "args" not in data:
        raise DescriptorError(f"表达式节点格式错误: {data!r}")
    op, args = data["op"], data["args"]
    if not isinstance(args, list):
        raise DescriptorError(f"表达式参数必须是列表: {data!r}")
    try:
        if op == "const":
            return Const(float(args[0]))
        if op == "coord":
            index = args[0]
            if not isinstance(index, int) or index < 0:
                raise DescriptorError(f"坐标编号不合法: {index!r}")
            return Coord(index)
        if op == "add":
            return add(*(from_json(a, box) for a in args))
        if op == "mul":
            return mul(*(from_json(a, box) for a in args))
        if op == "pow":
            return power(from_json(args[0], box), float(args[1]))
        if op in UNARY_CONSTRUCTORS:
            if len(args) != 1:
                raise DescriptorError(f"{op} 只接受一个参数")
            if op == "log":
                return log(from_json(args[0], box), box=box)
            return UNARY_CONSTRUCTORS[op](from_json(args[0], box))
    except (IndexError, TypeError, ValueError) as e:
        if isinstance(e, (DescriptorError, DomainError)):
            raise
        raise DescriptorError(f"表达式节点 {op} 参数错误: {e}") from e
    raise DescriptorError(f"未知表达式运算: {op!r}")
