#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义模块
负责实验室各模块共用的异常层次
"""


class LabError(Exception):
    """
    实验室异常基类
    """


class ChartError(LabError, ValueError):
    """图卡描述不合法（维数、t 坐标、区间等）"""


class DomainError(LabError, ValueError):
    """
    求值点越出定义域，或 log / 负幂子表达式取到非正值
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class CertificateError(DomainError):
    """区间算术无法为 log / 负幂节点给出正性证书"""


class NotABFunctionError(LabError, ValueError):
    """表达式不能写成 c*log|t| + g（log 系数不是常数）"""


class DegreeError(LabError, ValueError):
    """b-形式次数越界"""


class NondegeneracyError(LabError):
    """
    b-辛矩阵在采样点退化
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DescriptorError(LabError, ValueError):
    """JSON 描述文件格式错误"""


class NoBIntegralError(LabError):
    """可交换部分没有真正的 b-函数，无法化为 (log|t|, f_2, ...) 形式"""


class SystemInconsistencyError(LabError):
    """
    诱导括号表中出现非 F-basic 的条目
    """

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class InputContractError(LabError):
    """系统不是标准模型形式"""


class FlowError(LabError):
    """积分器失败（步长下溢等）"""


class DomainExitError(FlowError):
    """
    轨道离开图卡区域
    """

    def __init__(self, message, last_state=None, last_time=None):
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time


class LatticeNotFoundError(LabError):
    """扫描范围内找不到足够的回归向量"""


class SingularMonodromyError(LabError):
    """Newton 细化时单值矩阵奇异"""


class InterpolationError(LabError):
    """周期格插值网格过粗，回归残差超限"""


class QuadratureError(LabError):
    """同伦积分不收敛"""


class ShootingError(LabError):
    """角坐标打靶不收敛"""


class DarbouxError(LabError):
    """Darboux-Carathéodory 构造失败"""


class DependenceError(DarbouxError):
    """输入函数在中心点处线性相关"""


class NonCommutingError(DarbouxError):
    """输入函数不对合"""


class GalleryError(LabError, ValueError):
    """示例构造参数不合法"""


class PipelineError(LabError):
    """
    作用-角流水线某一阶段失败
    """

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
