#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理模块
负责实验室配置参数（容差、采样、积分器、周期格、作用-角）的加载与保存
"""

import copy
import json
import logging
import os
import time

from src.utils.errors import DescriptorError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    "config", "lab_config.json",
)

# 配置文件缺项时使用的默认值
DEFAULT_CONFIG = {
    "tolerances": {
        "rank_singular_value": 1e-8,
        "involution": 1e-8,
        "nondegeneracy_det": 1e-10,
        "closedness": 1e-12,
        "f_basic_match": 1e-9,
        "f_basic_bracket": 1e-6,
        "cas_basic": 1e-6,
        "normal_form_deviation": 1e-5,
        "dense_fraction": 0.99,
    },
    "sampling": {
        "bulk_samples": 128,
        "z_samples": 64,
        "margin": 0.05,
        "seed": 0,
    },
    "flow": {
        "method": "RK45",
        "rtol": 1e-11,
        "atol": 1e-12,
        "max_step": 0.25,
        "z_clamp": 1e-10,
    },
    "lattice": {
        "scan_max": 5.0,
        "scan_step": 0.1,
        "fine_step": 0.01,
        "scan_threshold": 0.25,
        "newton_tol": 1e-10,
        "residual_tol": 1e-8,
        "max_newton": 25,
        "fd_step": 1e-6,
        "grid_points": 5,
        "grid_margin": 0.1,
    },
    "action_angle": {
        "quadrature_nodes": 32,
        "seeds_per_axis": 4,
        "shooting_tol": 1e-12,
        "max_shooting": 30,
        "fd_step": 1e-6,
        "verify_samples": 16,
    },
    "output": {
        "directory": "output",
        "trace_steps": 200,
    },
    "system": {
        "debug_mode": False,
        "log_level": "INFO",
    },
}


def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """
    配置管理器类

    配置文件缺少的键由 DEFAULT_CONFIG 补齐；所有容差都必须为正。
    """

    def __init__(self, config_file=None):
        """
        初始化配置管理器

        Args:
            config_file: 配置文件路径，None 时使用 config/lab_config.json
        """
        self.config_file = config_file or DEFAULT_CONFIG_FILE
        self.config = copy.deepcopy(DEFAULT_CONFIG)

    def load_config(self):
        """
        加载配置文件

        Returns:
            dict: 配置参数字典（与默认值合并后）

        Raises:
            DescriptorError: 文件不是合法 JSON
        """
        if not os.path.exists(self.config_file):
            logger.warning("配置文件不存在，使用默认配置: %s", self.config_file)
            self.config = copy.deepcopy(DEFAULT_CONFIG)
            return self.config
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise DescriptorError(f"配置文件解析失败: {e}") from e
        data.pop("last_updated", None)
        self.config = _merge(DEFAULT_CONFIG, data)
        self._validate()
        logger.debug("已加载配置: %s", self.config_file)
        return self.config

    def save_config(self, path=None):
        """
        保存配置到文件

        Args:
            path: 目标路径，None 时写回 config_file

        Returns:
            bool: 保存是否成功
        """
        target = path or self.config_file
        try:
            data = dict(self.config)
            data["last_updated"] = time.strftime("%Y-%m-%d %H:%M:%S")
            os.makedirs(os.path.dirname(os.path.abspath(target)), exist_ok=True)
            with open(target, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
            return True
        except OSError as e:
            logger.error("保存配置失败: %s", e)
            return False

    def get_section(self, section):
        """
        获取配置节的副本

        Args:
            section: 配置节名称

        Returns:
            dict: 配置参数
        """
        return copy.deepcopy(self.config.get(section, {}))

    def get_tolerances(self):
        return self.get_section("tolerances")

    def get_sampling_config(self):
        return self.get_section("sampling")

    def get_flow_config(self):
        return self.get_section("flow")

    def get_lattice_config(self):
        return self.get_section("lattice")

    def get_action_angle_config(self):
        return self.get_section("action_angle")

    def get_log_level(self):
        """system.debug_mode 为真时强制 DEBUG"""
        system = self.config.get("system", {})
        if system.get("debug_mode", False):
            return "DEBUG"
        return system.get("log_level", "INFO")

    def update_config(self, section, key, value):
        """
        更新配置参数

        Args:
            section: 配置节
            key: 配置键
            value: 配置值
        """
        self.config.setdefault(section, {})[key] = value
        self._validate()

    def _validate(self):
        for key, value in self.config.get("tolerances", {}).items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise DescriptorError(f"容差 {key} 必须为正数: {value}")
