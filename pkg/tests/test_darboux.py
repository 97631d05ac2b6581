#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Darboux-Carathéodory 图卡测试
"""

import numpy as np
import pytest

from src.geometry.chart.expressions import Coord
from src.integrable.action_angle.darboux import darboux_caratheodory_chart, verify_darboux_chart
from src.integrable.gallery.gallery import standard_model
from src.utils.errors import DarbouxError, DependenceError, NonCommutingError


def z_center(entry, **values):
    center = np.array([0.5 * (lo + hi) for lo, hi in entry.chart.box])
    for name, value in values.items():
        center[entry.chart.index(name)] = value
    center[entry.chart.t_index] = 0.0
    return center


class TestConstruction:
    @pytest.mark.parametrize("c", [1.0, 2.0])
    def test_k0(self, c):
        entry = standard_model(1, 3, c)
        chart, report = darboux_caratheodory_chart(entry.structure, [], z_center(entry, theta1=0.3, p1=0.2))
        assert chart.k == 0
        assert report.get("darboux_form_deviation").points_tested == 100
        assert report.get("darboux_form_deviation").max_residual < 1e-5
        assert report.passed

    @pytest.mark.parametrize("c", [1.0, 2.0])
    def test_k1(self, c):
        entry = standard_model(2, 2, c)
        a2 = Coord(entry.chart.index("a2"))
        chart, report = darboux_caratheodory_chart(
            entry.structure, [a2], z_center(entry, theta1=0.3, theta2=0.6, a2=0.1),
        )
        assert chart.k == 1
        assert report.get("darboux_form_deviation").max_residual < 1e-5
        assert report.get("jacobian_at_center").passed

    def test_conjugate_vanishes_on_hypersurface(self):
        entry = standard_model(2, 2, 1.0)
        a2 = Coord(entry.chart.index("a2"))
        center = z_center(entry, theta1=0.3, theta2=0.6, a2=0.1)
        chart, _ = darboux_caratheodory_chart(entry.structure, [a2], center)
        assert np.allclose(chart.conjugates(center[None, :]), 0.0, atol=1e-12)

    def test_map_layout(self):
        entry = standard_model(2, 2, 1.0)
        a2 = Coord(entry.chart.index("a2"))
        center = z_center(entry, theta1=0.3, theta2=0.6, a2=0.1)
        chart, _ = darboux_caratheodory_chart(entry.structure, [a2], center)
        values = chart.map(center[None, :] + 0.01)
        assert values.shape == (1, 4)
        # (f_1, g_1, t, q_1)
        assert values[0, 0] == pytest.approx(0.11)
        assert values[0, 2] == pytest.approx(0.01)

    def test_reverify_with_other_seed(self):
        entry = standard_model(1, 3, 1.5)
        chart, _ = darboux_caratheodory_chart(entry.structure, [], z_center(entry))
        assert verify_darboux_chart(chart, samples=50, seed=7).passed


class TestErrors:
    def test_center_off_z(self):
        entry = standard_model(1, 3, 1.0)
        center = z_center(entry)
        center[entry.chart.t_index] = 0.2
        with pytest.raises(DarbouxError):
            darboux_caratheodory_chart(entry.structure, [], center)

    def test_non_commuting_inputs(self):
        entry = standard_model(1, 5, 1.0)
        p1, q1 = Coord(entry.chart.index("p1")), Coord(entry.chart.index("q1"))
        with pytest.raises(NonCommutingError):
            darboux_caratheodory_chart(entry.structure, [p1, q1], z_center(entry))

    def test_dependent_inputs(self):
        entry = standard_model(1, 5, 1.0)
        p1 = Coord(entry.chart.index("p1"))
        with pytest.raises(DependenceError):
            darboux_caratheodory_chart(entry.structure, [p1, p1 * 2.0], z_center(entry))

    def test_angle_does_not_commute_with_log_t(self):
        entry = standard_model(1, 3, 1.0)
        theta = Coord(entry.chart.index("theta1"))
        with pytest.raises(DependenceError):
            darboux_caratheodory_chart(entry.structure, [theta], z_center(entry))

    def test_too_many_functions(self):
        entry = standard_model(2, 2, 1.0)
        a2 = Coord(entry.chart.index("a2"))
        with pytest.raises(DependenceError):
            darboux_caratheodory_chart(entry.structure, [a2, a2 * 2.0], z_center(entry))
