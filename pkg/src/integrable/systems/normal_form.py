#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
正规形模块
负责把非交换 b-可积系统化为等价的 (log|t|, f_2, ..., f_s) 形式：
重排、除以奇异系数、更换定义函数，并消去其余积分的 log 部分
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.expressions import ZERO, add, mul
from src.utils.errors import NoBIntegralError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormalFormResult:
    """
    Args:
        system: 正规形系统
        defining_function: 新定义函数 t = exp(h)*t'（光滑表达式）
        transform: 仿射矩阵 A，F' = A F（同时包含重排）
        coefficient: 原 f_1 的奇异系数 c
    """

    system: object
    defining_function: object
    transform: np.ndarray
    coefficient: float

    def transformed_table(self, values):
        """按 B' = A B A^T 变换括号表 (N, s, s)"""
        A = self.transform
        return np.einsum("ij,njk,lk->nil", A, values, A)


def normal_form(system):
    """
    化为正规形

    先把交换部分中第一个奇异系数非零的积分移到首位；
    h = shift + g/c，f_1' = log|exp(h)*t'|；
    其余 f_j' = f_j - c_j*f_1'，光滑部分为 g_j + c_j*shift_j - c_j*h。
    对已是正规形的系统不做任何改动（幂等）。

    Raises:
        NoBIntegralError: 交换部分全是光滑函数（或秩为 0）
    """
    commuting = system.commuting
    lead = next(
        (i for i, f in enumerate(commuting) if isinstance(f, BFunction) and f.c != 0.0), None
    )
    if lead is None:
        raise NoBIntegralError(
            "交换部分没有奇异系数非零的 b-函数；这样的系统不满足定义的条件 (4)"
        )

    s = system.s
    order = [lead] + [i for i in range(s) if i != lead]
    permutation = np.zeros((s, s))
    for new, old in enumerate(order):
        permutation[new, old] = 1.0
    integrals = [system.integrals[i] for i in order]

    first = integrals[0]
    c = first.c
    h = add(first.shift, mul(1.0 / c, first.g))
    new_first = BFunction(1.0, ZERO, h)

    scaling = np.eye(s)
    scaling[0, 0] = 1.0 / c
    result = [new_first]
    for j, f in enumerate(integrals[1:], start=1):
        cj = getattr(f, "c", 0.0)
        if cj == 0.0:
            result.append(f)
            continue
        smooth = add(f.g, mul(cj, f.shift), mul(-cj, h))
        result.append(BFunction(0.0, smooth))
        # f_j' = f_j - c_j * f_1 / c
        scaling[j, 0] = -cj / c

    transform = scaling @ permutation
    normalized = system.with_integrals(result)
    defining = new_first.defining_function(system.chart)
    if order != list(range(s)) or c != 1.0 or h != ZERO:
        logger.info("正规形: 首积分来自第 %d 个，c = %g", lead + 1, c)
    return NormalFormResult(normalized, defining, transform, c)
