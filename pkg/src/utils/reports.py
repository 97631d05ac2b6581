#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
报告输出模块
负责校验结果的统一结构、JSON 报告与 CSV 轨迹文件的写出
"""

import csv
import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _to_builtin(value):
    """把 numpy 标量/数组转换为可 JSON 序列化的内置类型"""
    if hasattr(value, "to_dict"):
        return _to_builtin(value.to_dict())
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value) or np.isinf(value):
            return str(value)
        return value
    return value


@dataclass
class CheckResult:
    """
    单项校验结果

    Args:
        check: 校验名称
        points_tested: 参与校验的点数
        max_residual: 最大残差
        passed: 是否通过
        witness: 见证点（可选）
        detail: 附加信息
    """

    check: str
    points_tested: int
    max_residual: float
    passed: bool
    witness: object = None
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        data = {
            "check": self.check,
            "points_tested": int(self.points_tested),
            "max_residual": self.max_residual,
            "pass": bool(self.passed),
        }
        if self.witness is not None:
            data["witness"] = self.witness
        if self.detail:
            data["detail"] = self.detail
        return _to_builtin(data)


@dataclass
class Report:
    """
    校验报告：若干 CheckResult 加上可选的附加数据

    时间戳只放在 metadata 中，其余内容对同一输入逐字节一致。
    """

    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, result):
        self.checks.append(result)
        return result

    def get(self, name):
        for result in self.checks:
            if result.check == name:
                return result
        raise KeyError(name)

    @property
    def passed(self):
        return all(result.passed for result in self.checks)

    def failed_checks(self):
        return [result.check for result in self.checks if not result.passed]

    def to_dict(self):
        return _to_builtin({
            "schema": SCHEMA_VERSION,
            "title": self.title,
            "pass": self.passed,
            "checks": [result.to_dict() for result in self.checks],
            "data": self.data,
        })


def write_json_report(path, payload, metadata=None):
    """
    写出 JSON 报告

    Args:
        path: 输出文件路径
        payload: Report 或 dict
        metadata: 附加元数据（时间戳自动加入）

    Returns:
        str: 写出的文件路径
    """
    body = payload.to_dict() if hasattr(payload, "to_dict") else _to_builtin(payload)
    body = dict(body)
    body.setdefault("schema", SCHEMA_VERSION)
    meta = dict(metadata or {})
    meta["last_updated"] = time.strftime("%Y-%m-%d %H:%M:%S")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(body, f, ensure_ascii=False, indent=2, sort_keys=True)
    meta_path = os.path.splitext(path)[0] + ".meta.json"
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(meta), f, ensure_ascii=False, indent=2, sort_keys=True)
    logger.info("报告已写出: %s", path)
    return path


def load_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv_trace(path, times, points, names):
    """
    写出轨迹 CSV：第一列为模拟时间，其余为坐标

    Args:
        path: 输出文件路径
        times: (M,) 模拟时间
        points: (M, dim) 轨迹点
        names: 坐标名称

    Returns:
        str: 写出的文件路径
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t_sim", *names])
        for time_value, row in zip(times, points):
            writer.writerow([repr(float(time_value)), *(repr(float(v)) for v in row)])
    return path


def read_csv_trace(path):
    """
    读回轨迹 CSV

    Returns:
        tuple: (names, times, points)
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    values = np.array([[float(v) for v in row] for row in body]).reshape(len(body), len(header))
    return header[1:], values[:, 0], values[:, 1:]
