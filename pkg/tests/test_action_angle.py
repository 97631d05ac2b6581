#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
作用-角测试：同伦积分、作用坐标、恒等图卡与负对照、完整流水线
"""

import numpy as np
import pytest

from src.geometry.chart.expressions import Coord, log
from src.geometry.chart.fields import wrap_difference
from src.integrable.action_angle.action_angle import ActionAngleChart, ActionCoordinates, verify_normal_form
from src.integrable.action_angle.homotopy import HomotopyOperator
from src.integrable.action_angle.pipeline import construct_action_angle
from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.integrable.dynamics.period_lattice import PeriodLatticeFinder
from src.integrable.dynamics.uniformization import LatticeField
from src.integrable.gallery.gallery import counterexample_2d, scramble, sheared_model, standard_model
from src.integrable.systems.layout import StandardModelLayout
from src.utils.errors import PipelineError, QuadratureError
from src.utils.sampling import SamplePlan


def linear_coefficients(b):
    """λ = (0, 1 + b_2)"""
    b = np.atleast_2d(b)
    return np.column_stack([np.zeros(b.shape[0]), 1.0 + b[:, 1]])


class TestHomotopy:
    def test_closed_form(self):
        b = np.column_stack([np.linspace(-0.5, 0.5, 11), np.linspace(-0.9, 0.9, 11)])
        value = HomotopyOperator().integrate(linear_coefficients, b)
        expected = b[:, 1] + 0.5 * b[:, 1] ** 2
        assert np.max(np.abs(value - expected)) < 1e-10

    def test_retraction_endpoints(self):
        op = HomotopyOperator()
        b = np.array([[0.3, -0.7]])
        assert np.allclose(op.retraction(b, 1.0), b)
        assert np.allclose(op.retraction(b, 0.0), 0.0)

    def test_discontinuous_integrand_rejected(self):
        def step(b):
            b = np.atleast_2d(b)
            return np.column_stack([np.zeros(b.shape[0]), np.sign(b[:, 1] - 0.3)])

        with pytest.raises(QuadratureError):
            HomotopyOperator().integrate(step, np.array([[0.0, 0.9]]))

    def test_too_few_nodes(self):
        with pytest.raises(QuadratureError):
            HomotopyOperator(nodes=1)

    def test_primitive_of_mixed_form(self):
        # β = (1 + a)·dt/t∧da，t 不动时 γ = -(a + a²/2)·dt/t
        def two_form(b):
            B = np.zeros((b.shape[0], 2, 2))
            B[:, 0, 1] = 1.0 + b[:, 1]
            B[:, 1, 0] = -B[:, 0, 1]
            return B

        b = np.column_stack([np.linspace(-0.5, 0.5, 7), np.linspace(-0.9, 0.9, 7)])
        gamma = HomotopyOperator().primitive(two_form, b)
        assert np.allclose(gamma[:, 0], -(b[:, 1] + 0.5 * b[:, 1] ** 2), atol=1e-12)
        assert np.allclose(gamma[:, 1], 0.0)

    def test_primitive_of_transverse_area(self):
        # β = da_2∧da_3 的原函数 (a_2 da_3 - a_3 da_2)/2
        def two_form(b):
            B = np.zeros((b.shape[0], 3, 3))
            B[:, 1, 2], B[:, 2, 1] = 1.0, -1.0
            return B

        b = np.array([[0.2, 0.4, -0.6]])
        gamma = HomotopyOperator().primitive(two_form, b)
        assert np.allclose(gamma, [[0.0, 0.3, 0.2]])


@pytest.fixture(scope="module")
def stretched_actions():
    """f_2 = log(1 + a_2) 的标准模型：λ_2^2 = -(1 + a_2)，作用坐标 a_2 + a_2²/2"""
    entry = standard_model(2, 2, 1.5)
    a2 = entry.chart.index("a2")
    integrals = list(entry.system.integrals)
    integrals[1] = log(Coord(a2) + 1.0)
    system = entry.system.with_integrals(integrals, name="stretched")
    layout = StandardModelLayout.detect(entry.system)
    lattice = LatticeField(system, layout, PeriodLatticeFinder(FlowIntegrator(system.chart))).build()
    return system, ActionCoordinates(system, lattice, layout)


class TestActionCoordinates:
    def test_action_matches_closed_form(self, stretched_actions):
        system, actions = stretched_actions
        chart = system.chart
        X = SamplePlan(bulk_samples=16, seed=2).bulk_points(chart, avoid_z=True)
        X = X[np.abs(X[:, chart.index("a2")]) < 0.7]
        a = X[:, chart.index("a2")]
        assert np.max(np.abs(actions.fields[0].value(chart, X) - (a + 0.5 * a ** 2))) < 1e-7

    def test_modular_period(self, stretched_actions):
        _, actions = stretched_actions
        assert actions.c == pytest.approx(1.5, abs=1e-6)

    def test_verify(self, stretched_actions):
        system, actions = stretched_actions
        X = SamplePlan(bulk_samples=8, seed=4).bulk_points(system.chart, avoid_z=True)
        X = X[np.abs(X[:, system.chart.index("a2")]) < 0.7]
        report = actions.verify(X)
        assert report.get("action_differential").passed
        assert report.get("alpha_closed").passed
        assert report.get("action_cas_basic").passed
        assert report.get("modular_period_consistency").passed


class TestIdentityChart:
    @pytest.mark.parametrize("r,s,c", [(1, 1, 2.0), (2, 2, 1.0), (1, 3, 3.7)])
    def test_standard_model_is_fixed(self, r, s, c):
        entry = standard_model(r, s, c)
        chart = ActionAngleChart.identity(entry.system)
        assert chart.c == pytest.approx(c)
        X = SamplePlan(bulk_samples=32, seed=0).bulk_points(entry.chart, avoid_z=True)
        report = verify_normal_form(entry.structure, chart, X)
        assert report.get("normal_form_deviation").max_residual < 1e-12
        assert report.get("action_angle_brackets").passed

    def test_scrambled_identity(self):
        entry = scramble(standard_model(2, 2, 2.0), [2, 0, 3, 1])
        chart = ActionAngleChart.identity(entry.system)
        X = SamplePlan(bulk_samples=32, seed=0).bulk_points(entry.chart, avoid_z=True)
        assert verify_normal_form(entry.structure, chart, X).passed

    def test_shifted_angle_is_caught(self):
        entry = standard_model(2, 2, 1.0)
        chart = ActionAngleChart.identity(entry.system).with_angle(0, Coord(entry.chart.index("a2")), 0.3)
        X = SamplePlan(bulk_samples=32, seed=0).bulk_points(entry.chart, avoid_z=True)
        report = verify_normal_form(entry.structure, chart, X)
        assert not report.get("normal_form_deviation").passed
        assert report.get("normal_form_deviation").max_residual > 0.1
        assert report.get("normal_form_deviation").witness is not None

    def test_export(self):
        entry = standard_model(1, 1, 2.0)
        chart = ActionAngleChart.identity(entry.system)
        X = SamplePlan(bulk_samples=4, seed=0).bulk_points(entry.chart, avoid_z=True)
        data = chart.export(X)
        assert data["c"] == pytest.approx(2.0)
        assert data["target_names"] == ["theta1", "t"]
        assert np.asarray(data["values"]).shape == (4, 2)


class TestPipeline:
    def test_modular_period_of_standard_model(self, config, small_plan):
        result = construct_action_angle(standard_model(1, 1, 2.0).system, config, small_plan)
        assert abs(result.modular_period - 2.0) < 1e-6
        assert result.reports["normal_form"].get("normal_form_deviation").passed
        assert result.passed

    @pytest.mark.slow
    @pytest.mark.parametrize("c", [1.0, 2.5])
    def test_scrambled_standard_model(self, config, c):
        entry = scramble(standard_model(2, 2, c), [2, 0, 3, 1])
        plan = SamplePlan(bulk_samples=256, seed=5)
        result = construct_action_angle(entry.system, config, plan, samples=200)
        deviation = result.reports["normal_form"].get("normal_form_deviation")
        assert deviation.points_tested == 200
        assert deviation.max_residual < 1e-5
        assert abs(result.actions.c - result.modular_period) < 1e-6
        assert abs(result.modular_period - c) < 1e-6

    def test_sheared_angle_recovered(self, config, small_plan):
        entry = sheared_model(2, 2, 1.0, 0.1)
        result = construct_action_angle(entry.system, config, small_plan)
        deviation = result.reports["normal_form"].get("normal_form_deviation")
        assert deviation.points_tested > 0
        assert deviation.max_residual < 1e-5
        X = small_plan.bulk_points(entry.chart, avoid_z=True)[:8]
        theta = result.chart.angles.values(X)
        assert np.max(np.abs(wrap_difference(theta[:, 0] - entry.extras["expected_angle"](X)))) < 1e-6
        assert np.max(np.abs(wrap_difference(theta[:, 1] - X[:, entry.chart.index("theta2")]))) < 1e-6

    def test_flat_slice_misses_shear(self, config, small_plan):
        entry = sheared_model(2, 2, 1.0, 0.1)
        section = StandardModelLayout.detect(entry.system).section
        result = construct_action_angle(entry.system, config, small_plan, section=section)
        deviation = result.reports["normal_form"].get("normal_form_deviation")
        assert not deviation.passed
        assert deviation.max_residual > 0.05

    @pytest.mark.slow
    @pytest.mark.parametrize("c", [1.0, 2.5])
    def test_scrambled_sheared_model(self, config, c):
        entry = scramble(sheared_model(2, 2, c, 0.2), [2, 0, 3, 1])
        plan = SamplePlan(bulk_samples=256, seed=5)
        result = construct_action_angle(entry.system, config, plan, samples=200)
        deviation = result.reports["normal_form"].get("normal_form_deviation")
        assert deviation.points_tested == 200
        assert deviation.max_residual < 1e-5
        assert abs(result.modular_period - c) < 1e-6

    def test_stage_reported_on_failure(self, config, small_plan):
        # 交换部分只有光滑函数 z，没有 b-积分
        with pytest.raises(PipelineError) as info:
            construct_action_angle(counterexample_2d().system, config, small_plan)
        assert info.value.stage == "normal_form"
