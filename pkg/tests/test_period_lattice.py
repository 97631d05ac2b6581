#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
周期格测试：标准模型的解析周期、第一列约化、定向
"""

import numpy as np
import pytest

from src.integrable.dynamics.flow_integrator import FlowIntegrator
from src.integrable.dynamics.period_lattice import PeriodLatticeFinder, period_lattice
from src.integrable.gallery.gallery import standard_model
from src.utils.errors import LatticeNotFoundError


def base_point(entry, on_z):
    chart = entry.chart
    p0 = np.array([0.5 * (lo + hi) for lo, hi in chart.box])
    p0[chart.t_index] = 0.0 if on_z else 0.3
    return p0


class TestStandardModel:
    @pytest.mark.parametrize("r,s", [(1, 1), (1, 3), (2, 2)])
    @pytest.mark.parametrize("c", [1.0, 2.0, 3.7])
    def test_modular_period(self, r, s, c):
        entry = standard_model(r, s, c)
        basis = period_lattice(entry.structure, entry.system, base_point(entry, on_z=True))
        assert abs(basis.modular_period - c) < 1e-6
        assert basis.z_normalization_residual() < 1e-8
        assert basis.on_z

    @pytest.mark.parametrize("c", [1.0, 3.7])
    def test_off_z_matches_oracle(self, c):
        entry = standard_model(2, 2, c)
        basis = period_lattice(entry.structure, entry.system, base_point(entry, on_z=False))
        # 解析格：λ_1 = (-c, 0)，λ_2 = (0, -1)
        assert np.allclose(basis.basis, [[-c, 0.0], [0.0, -1.0]], atol=1e-6)
        assert basis.signed_period == pytest.approx(c, abs=1e-6)
        assert np.all(basis.residuals < 1e-8)

    def test_warm_start(self):
        entry = standard_model(2, 2, 2.0)
        finder = PeriodLatticeFinder(FlowIntegrator(entry.chart))
        fields = entry.system.hamiltonian_fields()
        basis = finder.find(fields, base_point(entry, on_z=False), initial=[[-2.0001, 0.0], [0.0, -0.9999]])
        assert np.allclose(basis.basis, [[-2.0, 0.0], [0.0, -1.0]], atol=1e-8)

    def test_not_found_in_small_window(self):
        entry = standard_model(1, 1, 3.7)
        finder = PeriodLatticeFinder(FlowIntegrator(entry.chart), scan_max=2.0)
        with pytest.raises(LatticeNotFoundError):
            finder.find(entry.system.hamiltonian_fields(), base_point(entry, on_z=True))


class TestReduction:
    def test_first_column_euclid(self):
        B = np.array([[2.0, 1.0], [3.0, 1.0]])
        reduced = PeriodLatticeFinder.reduce_first_column(B)
        assert np.count_nonzero(np.abs(reduced[:, 0]) > 1e-9) == 1
        assert abs(abs(np.linalg.det(reduced)) - abs(np.linalg.det(B))) < 1e-12
        assert abs(reduced[0, 0]) == 1.0

    def test_orientation(self):
        B = PeriodLatticeFinder.orient(np.array([[3.0, 0.0], [0.5, 1.0]]))
        assert B[0, 0] < 0 and B[1, 1] < 0

    def test_to_dict(self):
        entry = standard_model(1, 1, 1.0)
        basis = period_lattice(entry.structure, entry.system, base_point(entry, on_z=True))
        data = basis.to_dict()
        assert data["modular_period"] == pytest.approx(1.0, abs=1e-6)
        assert data["on_z"] is True
