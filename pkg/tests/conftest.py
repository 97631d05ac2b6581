#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试公共夹具
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.utils.config_manager import ConfigManager  # noqa: E402
from src.utils.sampling import SamplePlan  # noqa: E402


@pytest.fixture
def plan():
    return SamplePlan(bulk_samples=64, z_samples=32, seed=0)


@pytest.fixture
def small_plan():
    return SamplePlan(bulk_samples=16, z_samples=8, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def config(tmp_path):
    manager = ConfigManager(str(tmp_path / "missing.json"))
    manager.load_config()
    return manager
