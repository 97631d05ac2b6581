#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
图卡模块
负责坐标名称、定义坐标 t、区域盒与周期标记的描述和校验，
以及 b-标架槽位与坐标之间的对应
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.geometry.chart.fields import as_points, wrap_difference
from src.utils.errors import ChartError, DescriptorError, DomainError


@dataclass(frozen=True)
class Chart:
    """
    单个图卡

    Args:
        names: 坐标名称元组，长度即维数（必须为偶数）
        t_index: 定义坐标 t 的编号；None 表示纯辛图卡（不与 Z 相交）
        box: 每个坐标的闭区间 ((lo, hi), ...)
        periodic: 每个坐标是否为 R/Z 中的角坐标（区间取 [0, 1]）

    槽位 0 对应 dt/t（即 t 坐标），其余槽位按坐标顺序排列其它坐标；
    t_index 为 None 时槽位与坐标一一相同。
    """

    names: tuple
    t_index: object = None
    box: tuple = ()
    periodic: tuple = ()

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        dim = len(names)
        if dim == 0 or dim % 2 != 0:
            raise ChartError(f"图卡维数必须是正偶数，当前为 {dim}")
        if len(set(names)) != dim:
            raise ChartError(f"坐标名称重复: {names}")

        box = self.box or tuple((-1.0, 1.0) for _ in names)
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        if len(box) != dim:
            raise ChartError("区域盒的区间个数与维数不一致")
        for name, (lo, hi) in zip(names, box):
            if not lo < hi:
                raise ChartError(f"坐标 {name} 的区间 [{lo}, {hi}] 为空")
        object.__setattr__(self, "box", box)

        periodic = tuple(bool(p) for p in (self.periodic or (False,) * dim))
        if len(periodic) != dim:
            raise ChartError("周期标记个数与维数不一致")
        object.__setattr__(self, "periodic", periodic)

        if self.t_index is not None:
            t = int(self.t_index)
            if not 0 <= t < dim:
                raise ChartError(f"t 坐标编号 {t} 越界")
            object.__setattr__(self, "t_index", t)
            lo, hi = box[t]
            if not lo < 0.0 < hi:
                raise ChartError(f"t 坐标区间 [{lo}, {hi}] 必须在内部包含 0")
            if periodic[t]:
                raise ChartError("t 坐标不能是周期坐标")

    @property
    def dim(self):
        return len(self.names)

    @property
    def n(self):
        return self.dim // 2

    @property
    def meets_z(self):
        return self.t_index is not None

    @cached_property
    def slot_coords(self):
        """槽位 -> 坐标编号"""
        if self.t_index is None:
            return tuple(range(self.dim))
        return (self.t_index,) + tuple(i for i in range(self.dim) if i != self.t_index)

    @cached_property
    def coord_slots(self):
        """坐标编号 -> 槽位"""
        slots = [0] * self.dim
        for slot, coord in enumerate(self.slot_coords):
            slots[coord] = slot
        return tuple(slots)

    @cached_property
    def slot_names(self):
        names = [f"d{self.names[c]}" for c in self.slot_coords]
        if self.t_index is not None:
            names[0] = f"{names[0]}/{self.names[self.t_index]}"
        return tuple(names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError as e:
            raise ChartError(f"图卡中没有坐标 {name!r}") from e

    def wrap(self, points):
        """周期坐标折回 [0, 1)"""
        X = np.array(points, dtype=float, copy=True)
        cols = [i for i, p in enumerate(self.periodic) if p]
        if cols:
            X[..., cols] = np.mod(X[..., cols], 1.0)
        return X

    def difference(self, a, b):
        """a - b，周期坐标取折回差值"""
        delta = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        cols = [i for i, p in enumerate(self.periodic) if p]
        if cols:
            delta = np.array(delta, copy=True)
            delta[..., cols] = wrap_difference(delta[..., cols])
        return delta

    def distance(self, a, b):
        return np.linalg.norm(self.difference(a, b), axis=-1)

    def contains(self, points, slack=1e-12):
        """
        非周期坐标是否都在区域盒内

        Returns:
            ndarray(bool): (N,)
        """
        X, _ = as_points(points)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        inside = (X >= lo - slack) & (X <= hi + slack)
        inside[:, list(self.periodic)] = True
        return np.all(inside, axis=1)

    def check_points(self, points):
        """
        Raises:
            DomainError: 有点越出区域盒
        """
        X, _ = as_points(points)
        inside = self.contains(X)
        if not np.all(inside):
            bad = X[np.argmin(inside)]
            raise DomainError(f"点 {bad.tolist()} 不在图卡区域内", point=bad)
        return X

    def t_values(self, points):
        X, _ = as_points(points)
        if self.t_index is None:
            return np.full(X.shape[0], np.nan)
        return X[:, self.t_index]

    def to_smooth(self, slot_vector, points):
        """
        b-标架分量 -> 光滑坐标分量：t 分量乘以 t

        Args:
            slot_vector: (N, dim) 槽位顺序的系数
            points: (N, dim)

        Returns:
            ndarray: (N, dim) 坐标顺序的光滑向量场分量
        """
        V = np.asarray(slot_vector, dtype=float)
        X, _ = as_points(points)
        out = np.empty_like(V)
        out[..., list(self.slot_coords)] = V
        if self.t_index is not None:
            out[..., self.t_index] = V[..., 0] * X[:, self.t_index]
        return out

    def to_json(self):
        return {
            "dim": self.dim,
            "names": list(self.names),
            "t_index": self.t_index,
            "box": [list(b) for b in self.box],
            "periodic": list(self.periodic),
        }

    @classmethod
    def from_json(cls, data):
        """
        Raises:
            DescriptorError: 描述缺项或不一致
        """
        try:
            names = data["names"]
            chart = cls(
                names=tuple(names),
                t_index=data.get("t_index"),
                box=tuple(tuple(b) for b in data.get("box", ())),
                periodic=tuple(data.get("periodic", ())),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ChartError):
                raise DescriptorError(f"图卡描述不合法: {e}") from e
            raise DescriptorError(f"图卡描述格式错误: {e}") from e
        if "dim" in data and int(data["dim"]) != chart.dim:
            raise DescriptorError("图卡描述的 dim 与 names 长度不一致")
        return chart
