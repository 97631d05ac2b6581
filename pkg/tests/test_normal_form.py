#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
正规形与诱导括号测试
"""

import numpy as np
import pytest

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.expressions import ZERO, Coord, add, cos, mul
from src.integrable.gallery.gallery import galilean, standard_model
from src.integrable.systems.nc_system import NCBSystem
from src.integrable.systems.normal_form import normal_form
from src.integrable.systems.target_bracket import bracket_values, induced_target_bracket, is_cas_basic
from src.utils.errors import NoBIntegralError


def random_system(rng):
    """(θ_1, t, p_1, q_1) 上 f_1 = g + c·log|t|，g 为随机光滑函数"""
    base = standard_model(1, 3, 1.0).system
    theta, t, p, q = (Coord(i) for i in range(4))
    c = rng.uniform(0.5, 3.0)
    g = add(mul(rng.uniform(-1, 1), p), mul(rng.uniform(-1, 1), q, q), mul(rng.uniform(-0.5, 0.5), cos(t)))
    c2 = rng.uniform(-1.0, 1.0)
    integrals = (BFunction(c, g), BFunction(c2, p), BFunction.smooth(q))
    return NCBSystem(base.structure, integrals, 1, "random"), c


class TestNormalForm:
    @pytest.mark.parametrize("seed", range(20))
    def test_first_integral_becomes_log_t(self, seed):
        rng = np.random.default_rng(seed)
        system, c = random_system(rng)
        result = normal_form(system)
        first = result.system.integrals[0]
        assert first.c == 1.0 and first.g == ZERO
        assert result.coefficient == pytest.approx(c)
        assert all(f.is_smooth for f in result.system.integrals[1:])

    @pytest.mark.parametrize("seed", range(20))
    def test_bracket_table_invariant(self, seed, plan):
        rng = np.random.default_rng(seed)
        system, _ = random_system(rng)
        result = normal_form(system)
        X = plan.bulk_points(system.chart, avoid_z=True)
        before = result.transformed_table(bracket_values(system, X))
        after = bracket_values(result.system, X)
        assert np.max(np.abs(before - after)) < 1e-10

    def test_defining_function(self, rng):
        system, c = random_system(rng)
        result = normal_form(system)
        X = np.array([[0.2, 0.3, 0.1, -0.4]])
        f1 = system.integrals[0].value(system.chart, X)
        # f_1 = c·log|exp(h)·t|
        assert np.allclose(f1, c * np.log(np.abs(result.defining_function.evaluate(X))))

    def test_idempotent(self):
        system = standard_model(2, 2, 1.0).system
        result = normal_form(system)
        assert result.system.integrals == system.integrals
        assert np.allclose(result.transform, np.eye(system.s))

    def test_smooth_commuting_part_rejected(self):
        base = standard_model(1, 3, 1.0).system
        system = NCBSystem(base.structure, (Coord(2), BFunction.log_t(2.0), Coord(3)), 1)
        with pytest.raises(NoBIntegralError):
            normal_form(system)


class TestTargetBracket:
    def test_standard_model_entries_f_basic(self, plan):
        system = standard_model(1, 3, 1.0).system
        table = induced_target_bracket(system, plan.bulk_points(system.chart, avoid_z=True)[:16])
        assert table.pairs_tested > 0
        assert table.passed
        assert np.all(table.f_basic)
        assert table.involution_residual(system.rank) < 1e-12
        assert table.antisymmetry_residual() == 0.0

    def test_no_pairs_is_inconclusive(self, plan):
        system = standard_model(1, 3, 1.0).system
        table = induced_target_bracket(system, plan.bulk_points(system.chart, avoid_z=True)[:16], match_tol=0.0)
        assert table.pairs_tested == 0
        assert not table.conclusive
        assert not table.passed
        assert not np.any(table.f_basic)

    def test_rank_zero_is_inconclusive(self, plan):
        system = galilean("translations").system
        table = induced_target_bracket(system, plan.bulk_points(system.chart)[:8])
        assert not table.conclusive

    def test_casimir_detection(self, plan):
        system = standard_model(2, 2, 1.0).system
        X = plan.bulk_points(system.chart, avoid_z=True)
        assert is_cas_basic(system, mul(Coord(3), Coord(3)), X).passed
        assert not is_cas_basic(system, Coord(0), X).passed
