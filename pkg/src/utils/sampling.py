#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
采样计划模块
负责在图卡区域内和临界超曲面 Z 上生成可复现的拟随机采样点
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class SamplePlan:
    """
    采样计划

    Args:
        bulk_samples: 区域内部采样点数
        z_samples: Z 上的采样点数
        margin: 相对区间宽度的内缩比例（周期坐标不内缩）
        seed: Sobol 序列打乱种子
    """

    bulk_samples: int = 128
    z_samples: int = 64
    margin: float = 0.05
    seed: int = 0

    @classmethod
    def from_config(cls, sampling_config):
        return cls(
            bulk_samples=int(sampling_config.get("bulk_samples", 128)),
            z_samples=int(sampling_config.get("z_samples", 64)),
            margin=float(sampling_config.get("margin", 0.05)),
            seed=int(sampling_config.get("seed", 0)),
        )

    def _unit_samples(self, count, dim, salt):
        if count <= 0 or dim == 0:
            return np.zeros((max(count, 0), dim))
        sampler = qmc.Sobol(d=dim, scramble=True, seed=self.seed + salt)
        # Sobol 要求 2 的幂次，多采后截断
        m = int(np.ceil(np.log2(max(count, 2))))
        return sampler.random_base2(m)[:count]

    def _scale(self, chart, unit, columns):
        points = np.zeros((unit.shape[0], chart.dim))
        for k, index in enumerate(columns):
            lo, hi = chart.box[index]
            if not chart.periodic[index]:
                pad = self.margin * (hi - lo)
                lo, hi = lo + pad, hi - pad
            points[:, index] = lo + (hi - lo) * unit[:, k]
        return points

    def bulk_points(self, chart, avoid_z=False):
        """
        区域内部采样点

        Args:
            chart: 图卡
            avoid_z: 为 True 时把 |t| 过小的点推离 Z（b-函数求值需要有限值）

        Returns:
            ndarray: (N, dim)
        """
        unit = self._unit_samples(self.bulk_samples, chart.dim, 0)
        points = self._scale(chart, unit, range(chart.dim))
        if avoid_z and chart.t_index is not None:
            lo, hi = chart.box[chart.t_index]
            floor = 1e-3 * (hi - lo)
            t = points[:, chart.t_index]
            small = np.abs(t) < floor
            points[small, chart.t_index] = np.where(t[small] < 0, -floor, floor)
        return points

    def z_points(self, chart):
        """
        Z = {t = 0} 上的采样点；无 t 坐标的图卡返回空数组
        """
        if chart.t_index is None:
            return np.zeros((0, chart.dim))
        others = [i for i in range(chart.dim) if i != chart.t_index]
        unit = self._unit_samples(self.z_samples, len(others), 7)
        points = self._scale(chart, unit, others)
        points[:, chart.t_index] = 0.0
        return points

    def rng(self):
        return np.random.default_rng(self.seed)
