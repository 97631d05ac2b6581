#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
表达式树、图卡与 b-函数测试
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import Coord, add, cos, exp, from_json, log, mul, power, sin
from src.geometry.chart.fields import b_finite_difference
from src.utils.errors import CertificateError, ChartError, DescriptorError, NotABFunctionError

CHART = Chart(("t", "z", "x", "y"), t_index=0)
finite = st.floats(min_value=-0.9, max_value=0.9, allow_nan=False)


def sample_field():
    t, z, x, y = (Coord(i) for i in range(4))
    return add(mul(x, y, t), sin(z), mul(0.5, power(x, 3)), exp(mul(t, y)))


class TestSmoothField:
    def test_exact_partials(self, rng):
        f = sample_field()
        X = rng.uniform(-0.9, 0.9, size=(20, 4))
        t, z, x, y = X.T
        expected = np.stack([
            x * y + y * np.exp(t * y),
            np.cos(z),
            y * t + 1.5 * x ** 2,
            x * t + t * np.exp(t * y),
        ], axis=1)
        assert np.max(np.abs(f.gradient(X) - expected)) < 1e-14

    @settings(max_examples=30, deadline=None)
    @given(z=finite, x=finite, y=finite)
    def test_t_derivative_vanishes_on_z(self, z, x, y):
        f = sample_field()
        assert f.b_differential_at(CHART, np.array([[0.0, z, x, y]]))[0, 0] == 0.0

    def test_b_derivative_is_t_times_partial(self, rng):
        f = sample_field()
        X = rng.uniform(-0.9, 0.9, size=(10, 4))
        assert np.allclose(f.b_derivative(CHART, 0).evaluate(X), X[:, 0] * f.diff(0).evaluate(X), atol=1e-14)

    def test_log_certificate(self):
        box = ((-1.0, 1.0),) * 4
        with pytest.raises(CertificateError):
            log(Coord(2), box=box)
        assert log(add(Coord(2), 2.0), box=box) is not None

    def test_json_recertifies_log(self):
        box = ((-1.0, 1.0),) * 4
        data = log(Coord(2)).to_json()
        assert from_json(data) == log(Coord(2))
        with pytest.raises(CertificateError):
            from_json(data, box)
        assert from_json(log(add(Coord(2), 2.0)).to_json(), box) is not None

    def test_constant_folding(self):
        assert mul(2.0, 0.5, Coord(1)) == Coord(1)
        assert add(Coord(0), 0.0) == Coord(0)
        assert cos(0.0).evaluate(np.zeros(4)) == 1.0

    def test_json_round_trip(self):
        f = sample_field()
        assert from_json(f.to_json()) == f

    def test_malformed_json(self):
        with pytest.raises(DescriptorError):
            from_json({"op": "coord"})


class TestChart:
    def test_slots_put_t_first(self):
        chart = Chart(("x", "t", "y", "z"), t_index=1)
        assert chart.slot_coords[0] == 1
        assert chart.coord_slots[1] == 0

    def test_odd_dimension_rejected(self):
        with pytest.raises(ChartError):
            Chart(("x", "y", "z"))

    def test_t_interval_must_contain_zero(self):
        with pytest.raises(ChartError):
            Chart(("t", "z"), t_index=0, box=((0.1, 1.0), (-1.0, 1.0)))

    def test_periodic_difference_wraps(self):
        chart = Chart(("theta", "t"), t_index=1, box=((0.0, 1.0), (-1.0, 1.0)), periodic=(True, False))
        assert np.allclose(chart.difference(np.array([0.95, 0.0]), np.array([0.05, 0.0])), [-0.1, 0.0])


class TestBFunction:
    def test_b_differential_of_log(self, rng):
        f = BFunction.log_t(2.0, Coord(1))
        X = rng.uniform(-0.9, 0.9, size=(5, 4))
        dF = f.b_differential_at(CHART, X)
        assert np.allclose(dF[:, 0], 2.0)
        assert np.allclose(dF[:, 1], 1.0)

    def test_b_differential_finite_on_z(self):
        f = BFunction.log_t(1.0, mul(Coord(0), Coord(2)))
        dF = f.b_differential_at(CHART, np.array([[0.0, 0.1, 0.5, 0.2]]))
        assert np.all(np.isfinite(dF))
        assert dF[0, 0] == 1.0

    def test_value_singular_on_z(self):
        f = BFunction.log_t(1.0)
        assert np.isinf(f.value(CHART, np.array([[0.0, 0.0, 0.0, 0.0]])))[0]

    def test_non_constant_log_coefficient_rejected(self):
        with pytest.raises(NotABFunctionError):
            BFunction.from_log_expansion(Coord(2), mul(-1.0, Coord(1)))

    def test_constant_log_coefficient_accepted(self):
        f = BFunction.from_log_expansion(3.0, Coord(1))
        assert f.c == 3.0

    def test_scalar_algebra(self):
        f = BFunction.log_t(1.0, Coord(1)) * 2.0 - BFunction.smooth(Coord(2))
        X = np.array([[0.5, 0.2, 0.3, 0.0]])
        assert np.isclose(f.value(CHART, X)[0], 2.0 * np.log(0.5) + 0.4 - 0.3)

    def test_json_round_trip(self):
        f = BFunction(1.5, add(Coord(1), 2.0), Coord(3))
        assert BFunction.from_json(f.to_json()) == f

    def test_finite_difference_matches_exact(self, rng):
        f = BFunction.log_t(2.0, sample_field())
        X = rng.uniform(-0.9, 0.9, size=(8, 4))
        X[:, 0] = rng.uniform(0.2, 0.9, size=8) * rng.choice([-1.0, 1.0], size=8)
        approx = b_finite_difference(lambda P: f.value(CHART, P), CHART, X, step=1e-5)
        assert np.allclose(approx, f.b_differential_at(CHART, X), atol=1e-7)
