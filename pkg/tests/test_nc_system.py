#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
系统校验测试：四个定义条件、反例、描述文件读写
"""

import json

import numpy as np
import pytest

from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import Coord, add, log
from src.geometry.forms.bforms import BForm
from src.geometry.poisson.bsymplectic import BSymplecticStructure
from src.integrable.gallery.gallery import counterexample_2d, galilean, standard_model, twisted_lift
from src.integrable.systems.nc_system import NCBSystem, verify_system
from src.utils.errors import CertificateError, DescriptorError, LabError

CONDITIONS = (
    "condition_1_independence",
    "condition_2_involution",
    "condition_3_dimension",
    "condition_4_smooth_independence",
)


def outcome(report):
    return {name: report.get(name).passed for name in CONDITIONS}


class TestCounterexample:
    def test_fails_exactly_condition_4(self, plan):
        report = verify_system(counterexample_2d().system, plan)
        assert outcome(report) == {
            "condition_1_independence": True,
            "condition_2_involution": True,
            "condition_3_dimension": True,
            "condition_4_smooth_independence": False,
        }

    def test_witness_field_vanishes_on_z(self, plan):
        entry = counterexample_2d()
        result = verify_system(entry.system, plan).get("condition_4_smooth_independence")
        witness = np.array(result.witness)
        assert witness[entry.chart.t_index] == 0.0
        field = entry.structure.hamiltonian_field(entry.system.integrals[0])
        assert np.all(field.smooth_components(witness[None, :]) == 0.0)

    def test_log_replacement_passes(self, plan):
        assert verify_system(counterexample_2d(log_variant=True).system, plan).passed


class TestVerifier:
    @pytest.mark.parametrize("r,s,c", [(1, 1, 1.0), (2, 2, 3.0), (1, 3, 1.0), (3, 3, 2.0)])
    def test_standard_models_pass(self, plan, r, s, c):
        assert verify_system(standard_model(r, s, c).system, plan).passed

    def test_rank_zero_condition_4_vacuous(self, plan):
        result = verify_system(galilean("translations").system, plan).get("condition_4_smooth_independence")
        assert result.passed and result.detail["vacuous"]

    def test_so3_dependent_differentials(self, plan):
        report = verify_system(galilean("so3_r3").system, plan)
        assert not report.get("condition_1_independence").passed
        assert report.get("condition_2_involution").passed

    def test_wrong_dimension(self, plan):
        base = standard_model(2, 2, 1.0).system
        system = NCBSystem(base.structure, base.integrals[:1] + (Coord(0),), 1, "short")
        assert not verify_system(system, plan).get("condition_3_dimension").passed

    def test_non_involutive_pair(self, plan):
        base = standard_model(1, 3, 1.0).system
        # p1 与 q1 不交换，宣称秩 2 后条件 (2) 失败并给出见证
        system = NCBSystem(base.structure, base.integrals, 2, "bad rank")
        result = verify_system(system, plan).get("condition_2_involution")
        assert not result.passed
        assert result.witness["pair"] == [2, 3]

    def test_singular_noncommuting_integral_flagged(self, plan):
        base = twisted_lift(2).system
        system = NCBSystem(base.structure, (base.integrals[1], base.integrals[0]), 1, "swapped")
        report = verify_system(system, plan)
        assert report.data["noncommuting_smooth"] is False

    def test_degenerate_form_reported(self, plan):
        # ω = t·(dt/t)∧dz = dt∧dz 在 Z 上退化
        chart = Chart(("t", "z"), t_index=0)
        omega = BForm.from_dict(chart, 2, {(0, 1): Coord(0)})
        system = NCBSystem(BSymplecticStructure(omega), (Coord(1),), 1, "smooth area")
        report = verify_system(system, plan)
        check = report.get("b_symplectic")
        assert not check.passed
        assert not check.detail["nondegenerate"]
        assert check.witness is not None
        assert report.get("condition_1_independence").passed
        for name in ("condition_2_involution", "condition_4_smooth_independence"):
            assert not report.get(name).passed
            assert report.get(name).detail["skipped"] == "omega degenerate"

    def test_nondegeneracy_threshold_from_tolerances(self, plan):
        system = standard_model(1, 1, 1.0).system
        assert verify_system(system, plan, {"nondegeneracy_det": 1e-10}).get("b_symplectic").passed
        assert not verify_system(system, plan, {"nondegeneracy_det": 2.0}).get("b_symplectic").passed

    def test_rank_out_of_range(self):
        base = standard_model(1, 1, 1.0).system
        with pytest.raises(LabError):
            NCBSystem(base.structure, base.integrals, 3)


class TestDescriptor:
    def test_round_trip(self):
        system = galilean("b_s1").system
        again = NCBSystem.from_json(json.loads(json.dumps(system.to_json())))
        assert again.to_json() == system.to_json()

    def test_missing_fields(self):
        with pytest.raises(DescriptorError):
            NCBSystem.from_json({"chart": {}, "rank": 1})

    def test_log_integral_recertified_on_load(self):
        base = standard_model(1, 3, 1.0).system
        p = base.chart.index("p1")
        bad = base.with_integrals(base.integrals[:2] + (log(Coord(p)),))
        with pytest.raises(CertificateError):
            NCBSystem.from_json(json.loads(json.dumps(bad.to_json())))
        good = base.with_integrals(base.integrals[:2] + (log(add(Coord(p), 2.0)),))
        again = NCBSystem.from_json(json.loads(json.dumps(good.to_json())))
        assert again.to_json() == good.to_json()

    def test_not_an_object(self):
        with pytest.raises(DescriptorError):
            NCBSystem.from_json([1, 2, 3])
