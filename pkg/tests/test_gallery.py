#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
示例库测试：每个条目的预期事实、描述文件往返、名称解析、坐标重排
"""

import json

import numpy as np
import pytest

from src.integrable.gallery.gallery import (
    CONDITIONS,
    GALILEAN_VARIANTS,
    boundary_double,
    catalog,
    galilean,
    get_entry,
    scramble,
    sheared_model,
    standard_model,
    twisted_lift,
)
from src.integrable.systems.nc_system import NCBSystem, verify_system
from src.utils.errors import GalleryError
from src.utils.sampling import SamplePlan

ENTRIES = catalog()


@pytest.mark.parametrize("entry", ENTRIES, ids=lambda e: e.name)
def test_expected_facts(entry, small_plan):
    results = entry.check_facts(small_plan)
    failed = [name for name, ok in results.items() if not ok]
    assert not failed, f"{entry.name}: {failed}"


@pytest.mark.parametrize("entry", [e for e in ENTRIES if e.name != "non_closed_control"], ids=lambda e: e.name)
def test_descriptor_round_trip(entry, small_plan):
    text = json.dumps(entry.to_json())
    restored = NCBSystem.from_json(json.loads(text))
    assert restored.chart.names == entry.chart.names
    assert restored.rank == entry.system.rank
    X = small_plan.bulk_points(entry.chart, avoid_z=True)
    assert np.allclose(restored.values(X), entry.system.values(X))
    original = verify_system(entry.system, small_plan)
    again = verify_system(restored, small_plan)
    assert [original.get(c).passed for c in CONDITIONS] == [again.get(c).passed for c in CONDITIONS]


class TestGalilean:
    @pytest.mark.parametrize("variant", GALILEAN_VARIANTS)
    def test_variant_names(self, variant):
        assert galilean(variant).name == f"galilean:{variant}"

    def test_so3_fails_independence(self, small_plan):
        report = galilean("so3_r3").verify(small_plan)
        assert not report.get("condition_1_independence").passed

    def test_b_s1_passes(self, small_plan):
        assert galilean("b_s1").verify(small_plan).passed

    def test_unknown_variant(self):
        with pytest.raises(GalleryError):
            galilean("lorentz")


class TestConstructions:
    def test_boundary_double_rank(self):
        entry = boundary_double()
        base = entry.extras["base"]
        assert entry.system.rank == base.rank + 1
        assert entry.chart.dim == base.chart.dim + 2
        assert entry.chart.names[-2:] == ("h", "theta_h")

    def test_boundary_double_needs_symplectic_base(self):
        with pytest.raises(GalleryError):
            boundary_double(standard_model(1, 1, 1.0).system)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_twisted_lift_dimension(self, n):
        entry = twisted_lift(n)
        assert entry.chart.dim == 2 * n + 2
        assert entry.system.rank == n

    def test_twisted_lift_bad_n(self):
        with pytest.raises(GalleryError):
            twisted_lift(0)

    def test_bad_standard_model(self):
        with pytest.raises(GalleryError):
            standard_model(2, 3, 1.0)


class TestRegistry:
    @pytest.mark.parametrize("name,expected", [
        ("standard_model:2,2,3", "standard_model(2,2,3.0)"),
        ("standard_model", "standard_model(1,1,1.0)"),
        ("galilean:b_s1", "galilean:b_s1"),
        ("counterexample_2d", "counterexample_2d"),
        ("counterexample_2d:log", "counterexample_2d_log"),
        ("non_closed_control", "non_closed_control"),
        ("sheared_model:2,2,1.5,0.2", "sheared_model(2,2,1.5,0.2)"),
    ])
    def test_parse(self, name, expected):
        assert get_entry(name).name == expected

    @pytest.mark.parametrize("name", ["nothing", "standard_model:1,1,1,1", "standard_model:x", "twisted_lift:two", "sheared_model:1,1"])
    def test_rejected(self, name):
        with pytest.raises(GalleryError):
            get_entry(name)


class TestScramble:
    def test_permuted_names(self):
        entry = scramble(standard_model(2, 2, 2.0), [2, 0, 3, 1])
        assert entry.chart.names == ("t", "theta1", "a2", "theta2")
        assert entry.chart.t_index == 0
        assert entry.extras["permutation"] == [2, 0, 3, 1]

    def test_values_follow_coordinates(self):
        base = standard_model(2, 2, 2.0)
        entry = scramble(base, [2, 0, 3, 1])
        X = SamplePlan(bulk_samples=8, seed=3).bulk_points(base.chart, avoid_z=True)
        assert np.allclose(entry.system.values(X[:, [2, 0, 3, 1]]), base.system.values(X))

    def test_scrambled_still_verifies(self, small_plan):
        assert scramble(galilean("b_s1"), [5, 4, 3, 2, 1, 0]).verify(small_plan).passed

    def test_sheared_model_keeps_integrals(self):
        entry = sheared_model(2, 2, 1.5, 0.2)
        base = standard_model(2, 2, 1.5)
        X = SamplePlan(bulk_samples=8, seed=3).bulk_points(base.chart, avoid_z=True)
        assert np.allclose(entry.system.values(X), base.system.values(X))
        assert not np.allclose(entry.structure.matrix(X), base.structure.matrix(X))

    def test_not_a_permutation(self):
        with pytest.raises(GalleryError):
            scramble(standard_model(1, 1, 1.0), [0, 0])
