#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行状态模块
负责命令行运行的命令种类、退出状态与运行配置
"""

from dataclasses import asdict, dataclass, field
from enum import Enum

from src.utils.errors import DescriptorError


class Command(Enum):
    """
    命令枚举
    """
    VERIFY = "verify"                # 校验四个条件
    ACTION_ANGLE = "action-angle"    # 作用-角流水线
    TRACE = "trace"                  # 积分流轨迹


class ExitStatus(Enum):
    """
    退出状态枚举
    """
    PASS = 0                         # 全部通过
    FAILURE = 1                      # 校验或流水线失败
    PARSE_ERROR = 2                  # 输入无法解析


@dataclass
class RunConfig:
    """
    一次命令行运行的配置

    Args:
        command: Command
        gallery: 示例库条目名（与 file 二选一）
        file: 系统描述 JSON 路径
        samples: 区域内部采样点数（None 时取配置文件）
        tol: 本命令的主容差（verify 覆盖 involution，action-angle 覆盖 normal_form_deviation）
        seed: 采样种子
        out: 输出目录（None 时取配置 output.directory）
        time: 轨迹模拟时间
        point: 轨迹初始点
        integrals: 轨迹使用的积分编号（从 1 开始）
        config_file: 配置文件路径

    相同配置两次运行得到逐字节相同的报告。
    """

    command: Command
    gallery: str = None
    file: str = None
    samples: int = None
    tol: float = None
    seed: int = 0
    out: str = None
    time: float = 1.0
    point: tuple = None
    integrals: tuple = ()
    config_file: str = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.command, Command):
            try:
                self.command = Command(self.command)
            except ValueError as e:
                raise DescriptorError(f"未知命令 {self.command!r}") from e
        if (self.gallery is None) == (self.file is None):
            raise DescriptorError("必须且只能给出 --gallery 或 --file 之一")
        if self.tol is not None and not self.tol > 0:
            raise DescriptorError(f"容差必须为正数: {self.tol}")
        if self.samples is not None and self.samples < 1:
            raise DescriptorError(f"采样点数必须为正整数: {self.samples}")
        if self.point is not None:
            self.point = tuple(float(v) for v in self.point)
        self.integrals = tuple(int(i) for i in self.integrals)
        if any(i < 1 for i in self.integrals):
            raise DescriptorError("积分编号从 1 开始")

    @property
    def source(self):
        return f"gallery:{self.gallery}" if self.gallery is not None else f"file:{self.file}"

    @property
    def stem(self):
        """输出文件名前缀"""
        raw = self.gallery if self.gallery is not None else self.file.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in raw)

    def to_dict(self):
        data = asdict(self)
        data["command"] = self.command.value
        return data
