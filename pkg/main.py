#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
非交换 b-可积系统计算实验室 - 主程序
描述: 命令行入口，负责路径设置并把子命令交给 src.cli.lab_runner
"""

import os
import sys

# 路径设置：确保能导入 src 包
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.cli.lab_runner import run  # noqa: E402
from src.utils.run_state import ExitStatus  # noqa: E402


class BIntegrableLab:
    def __init__(self, argv=None):
        self.argv = sys.argv[1:] if argv is None else list(argv)

    def start(self):
        print("=== b-Integrable Systems Lab ===")
        try:
            code = run(self.argv)
        except KeyboardInterrupt:
            print("🛑 Interrupted")
            return ExitStatus.FAILURE.value
        if code == ExitStatus.PASS.value:
            print("✅ All checks passed")
        elif code == ExitStatus.FAILURE.value:
            print("❌ Checks failed, see the report")
        else:
            print("⚠️ Input could not be parsed")
        return code


def main():
    sys.exit(BIntegrableLab().start())


if __name__ == "__main__":
    main()
