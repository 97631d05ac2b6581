#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
一致化测试：插值格基、Y_i 的时间 1 回归、李导数为零
"""

import numpy as np
import pytest

from src.geometry.chart.expressions import Coord, log
from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.integrable.dynamics.period_lattice import PeriodLatticeFinder
from src.integrable.dynamics.uniformization import LatticeField, uniformize
from src.integrable.gallery.gallery import standard_model
from src.integrable.systems.layout import StandardModelLayout
from src.utils.errors import InterpolationError
from src.utils.sampling import SamplePlan


def build(system, layout=None):
    integrator = FlowIntegrator(system.chart)
    layout = layout or StandardModelLayout.detect(system)
    lattice = LatticeField(system, layout, PeriodLatticeFinder(integrator)).build()
    return integrator, lattice, uniformize(system.structure, system, lattice)


def stretched_system(entry):
    """f_2 = log(1 + a_2)：周期 1 + a_2 随横截值变化"""
    a2 = entry.chart.index("a2")
    integrals = list(entry.system.integrals)
    integrals[1] = log(Coord(a2) + 1.0)
    return entry.system.with_integrals(integrals, name="stretched")


@pytest.fixture(scope="module", params=[1.0, 2.5])
def uniformized(request):
    entry = standard_model(2, 2, request.param)
    return (entry, request.param) + build(entry.system)


@pytest.fixture(scope="module")
def stretched():
    entry = standard_model(2, 2, 1.5)
    system = stretched_system(entry)
    layout = StandardModelLayout.detect(entry.system)
    return (entry, system) + build(system, layout)


def torus_points(chart, count=10, seed=3):
    return SamplePlan(bulk_samples=count, seed=seed).bulk_points(chart, avoid_z=True)


class TestStandardModel:
    def test_lattice_table(self, uniformized):
        entry, c, _, lattice, _ = uniformized
        assert lattice.modular_period == pytest.approx(c, abs=1e-6)
        assert np.allclose(lattice.values, np.array([[-c, 0.0], [0.0, -1.0]]), atol=1e-6)

    def test_verify_report(self, uniformized):
        entry, _, integrator, _, flows = uniformized
        points = torus_points(entry.chart)
        report = flows.verify(integrator, points, points)
        assert report.get("return_residual").max_residual < 1e-6
        assert report.get("lie_derivative").max_residual < 1e-7
        assert report.get("commutation").passed
        assert report.get("lattice_cas_basic").passed
        assert report.passed

    def test_y1_rotates_first_angle(self, uniformized):
        entry, _, integrator, _, flows = uniformized
        chart = entry.chart
        points = torus_points(chart, count=4)
        moved = integrator.flow_batch(flows[0], points, 0.25)
        shift = chart.difference(moved, points)
        expected = np.zeros(chart.dim)
        expected[chart.index("theta1")] = 0.25
        assert np.allclose(shift, expected, atol=1e-8)

    def test_to_dict(self, uniformized):
        _, c, _, lattice, _ = uniformized
        data = lattice.to_dict()
        assert data["modular_period"] == pytest.approx(c, abs=1e-6)
        assert len(data["axes"]) == 2


class TestVaryingLattice:
    def test_periods_follow_action(self, stretched):
        entry, system, _, lattice, _ = stretched
        a = np.linspace(-0.6, 0.6, 7)
        b = np.column_stack([np.full_like(a, 0.2), a])
        lam = lattice.at_values(b)
        assert np.allclose(lam[:, 1, 1], -(1.0 + a), atol=1e-6)
        assert np.allclose(lam[:, 0, 0], -1.5, atol=1e-6)
        assert np.allclose(lam[:, 1, 0], 0.0, atol=1e-6)

    def test_uniformized_return(self, stretched):
        entry, system, integrator, _, flows = stretched
        points = torus_points(entry.chart, count=10)
        points = points[np.abs(points[:, entry.chart.index("a2")]) < 0.7]
        report = flows.verify(integrator, points, points)
        assert report.get("return_residual").max_residual < 1e-6
        assert report.get("lie_derivative").max_residual < 1e-7


class TestErrors:
    def test_too_few_nodes(self):
        entry = standard_model(1, 1, 1.0)
        finder = PeriodLatticeFinder(FlowIntegrator(entry.chart))
        with pytest.raises(InterpolationError):
            LatticeField(entry.system, StandardModelLayout.detect(entry.system), finder, grid_points=3)

    def test_query_before_build(self):
        entry = standard_model(1, 1, 1.0)
        finder = PeriodLatticeFinder(FlowIntegrator(entry.chart))
        lattice = LatticeField(entry.system, StandardModelLayout.detect(entry.system), finder)
        with pytest.raises(InterpolationError):
            lattice.at_values([[0.1]])
