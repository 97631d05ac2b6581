#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
流积分模块
负责 b-哈密顿向量场的数值流（自适应 5(4) 阶 Runge-Kutta）、联合流与区域越界检测
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from src.utils.errors import DomainExitError, FlowError

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """
    轨道

    Args:
        times: (M,) 模拟时间
        points: (M, dim) 轨道点（周期坐标未折回）
        dense: 稠密输出插值器（可选）
    """

    times: np.ndarray
    points: np.ndarray
    dense: object = None

    @property
    def final(self):
        return self.points[-1]

    def at(self, times):
        """用稠密输出在任意时间取值，(K, dim)"""
        if self.dense is None:
            raise FlowError("轨道没有稠密输出")
        return np.asarray(self.dense(np.atleast_1d(times))).T


class FlowIntegrator:
    """
    向量场流积分器

    诱导光滑向量场的 t 分量为 t*v_0：从 Z 出发（|t| < z_clamp）的轨道把 t 置为 0，
    此后每个 Runge-Kutta 阶段的 t 分量都恰为 0，轨道不会离开 Z。
    """

    def __init__(self, chart, method="RK45", rtol=1e-11, atol=1e-12, max_step=0.25, z_clamp=1e-10):
        """
        Args:
            chart: 图卡
            method: solve_ivp 方法名（默认 Dormand-Prince 5(4)）
            rtol, atol: 误差容限
            max_step: 最大步长
            z_clamp: 视为在 Z 上的 |t| 阈值
        """
        self.chart = chart
        self.method = method
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.z_clamp = z_clamp
        self._bounded = [i for i, p in enumerate(chart.periodic) if not p]
        self._lo = np.array([chart.box[i][0] for i in self._bounded])
        self._hi = np.array([chart.box[i][1] for i in self._bounded])

    @classmethod
    def from_config(cls, chart, flow_config):
        return cls(
            chart,
            method=flow_config.get("method", "RK45"),
            rtol=float(flow_config.get("rtol", 1e-11)),
            atol=float(flow_config.get("atol", 1e-12)),
            max_step=float(flow_config.get("max_step", 0.25)),
            z_clamp=float(flow_config.get("z_clamp", 1e-10)),
        )

    def _prepare(self, p0):
        y0 = np.array(p0, dtype=float, copy=True).reshape(self.chart.dim)
        t = self.chart.t_index
        if t is not None and abs(y0[t]) < self.z_clamp:
            y0[t] = 0.0
        return y0

    def _exit_event(self):
        slack = 1e-9 * np.maximum(self._hi - self._lo, 1.0)

        def event(_, y):
            if not self._bounded:
                return 1.0
            values = y[self._bounded]
            return float(np.min(np.minimum(values - self._lo, self._hi - values) + slack))

        event.terminal = True
        event.direction = -1
        return event

    def integrate(self, vector_field, p0, time, t_eval=None, dense=False):
        """
        沿向量场积分 time（可为负）

        Args:
            vector_field: b-向量场（BVectorField / PointwiseVectorField）
            p0: 初始点
            time: 积分时间
            t_eval: 输出时间点
            dense: 是否保留稠密输出

        Returns:
            Trajectory

        Raises:
            DomainExitError: 轨道离开图卡区域（携带最后的有效状态）
            FlowError: 积分失败（步长下溢等）
        """
        y0 = self._prepare(p0)
        if time == 0.0:
            return Trajectory(np.zeros(1), y0[None, :].copy())

        def rhs(_, y):
            return vector_field.smooth_components(y[None, :])[0]

        solution = solve_ivp(
            rhs, (0.0, float(time)), y0, method=self.method, t_eval=t_eval,
            dense_output=dense, events=self._exit_event() if self._bounded else None,
            rtol=self.rtol, atol=self.atol, max_step=self.max_step,
        )
        if solution.status == -1:
            raise FlowError(f"积分失败: {solution.message}")
        if solution.status == 1:
            last_time = float(solution.t_events[0][0])
            last_state = solution.y_events[0][0]
            logger.warning("轨道在 t_sim = %.6g 处离开图卡区域", last_time)
            raise DomainExitError(
                f"轨道在 t_sim = {last_time:.6g} 处离开图卡区域",
                last_state=last_state, last_time=last_time,
            )
        return Trajectory(solution.t, solution.y.T, solution.sol if dense else None)

    def flow_point(self, vector_field, p0, time):
        """Φ^time(p0)"""
        if time == 0.0:
            return self._prepare(p0)
        return self.integrate(vector_field, p0, time).final

    def joint_flow(self, vector_fields, p0, times):
        """
        Φ^{s_1}_{V_1} ∘ ... ∘ Φ^{s_r}_{V_r}(p0)：先沿 V_r，最后沿 V_1
        """
        point = self._prepare(p0)
        for field, time in reversed(list(zip(vector_fields, times))):
            point = self.flow_point(field, point, float(time))
        return point

    def flow_batch(self, vector_field, points, times):
        """
        一批点各自沿同一向量场积分各自的时间（时间重标度到 [0, 1] 后合并为一个方程组）

        Args:
            vector_field: b-向量场
            points: (N, dim)
            times: 标量或 (N,)

        Returns:
            ndarray: (N, dim)

        Raises:
            DomainExitError: 有点离开图卡区域（last_state 为第一个越界点）
            FlowError: 积分失败
        """
        X = np.array(np.atleast_2d(points), dtype=float, copy=True)
        dim = self.chart.dim
        t = self.chart.t_index
        if t is not None:
            X[np.abs(X[:, t]) < self.z_clamp, t] = 0.0
        times = np.broadcast_to(np.asarray(times, dtype=float), (X.shape[0],))
        active = times != 0.0
        if not np.any(active):
            return X
        scale = times[active]

        def rhs(_, y):
            Y = y.reshape(-1, dim)
            return (scale[:, None] * vector_field.smooth_components(Y)).ravel()

        solution = solve_ivp(
            rhs, (0.0, 1.0), X[active].ravel(), method=self.method,
            rtol=self.rtol, atol=self.atol, max_step=self.max_step / float(np.max(np.abs(scale))),
        )
        if solution.status == -1:
            raise FlowError(f"批量积分失败: {solution.message}")
        final = solution.y[:, -1].reshape(-1, dim)
        if self._bounded:
            values = final[:, self._bounded]
            slack = 1e-9 * np.maximum(self._hi - self._lo, 1.0)
            outside = np.any((values < self._lo - slack) | (values > self._hi + slack), axis=1)
            if np.any(outside):
                raise DomainExitError(
                    f"{int(np.sum(outside))} 条轨道离开图卡区域", last_state=final[np.argmax(outside)], last_time=1.0,
                )
        X[active] = final
        return X

    def joint_flow_batch(self, vector_fields, points, times):
        """批量联合流，times 为 (N, r)，先沿 V_r"""
        X = np.atleast_2d(points)
        times = np.atleast_2d(np.asarray(times, dtype=float))
        for k in reversed(range(len(vector_fields))):
            X = self.flow_batch(vector_fields[k], X, times[:, k])
        return np.array(X, dtype=float, copy=True)


def flow(structure, f, p0, time, integrator=None, t_eval=None):
    """
    哈密顿向量场 X_f 的流

    Returns:
        Trajectory
    """
    integrator = integrator or FlowIntegrator(structure.chart)
    return integrator.integrate(structure.hamiltonian_field(f), p0, time, t_eval=t_eval)


def joint_flow(structure, functions, p0, times, integrator=None):
    """交换函数的联合流，定义 R^r 作用"""
    integrator = integrator or FlowIntegrator(structure.chart)
    fields = [structure.hamiltonian_field(f) for f in functions]
    return integrator.joint_flow(fields, p0, times)
