#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志配置模块
负责统一的日志格式与级别
"""

import logging

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(level="INFO"):
    """
    配置根日志器

    Args:
        level: 日志级别名称或数值（来自配置 system.log_level）

    Returns:
        logging.Logger: 根日志器
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    return logging.getLogger()
