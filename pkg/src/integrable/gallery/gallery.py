#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
示例库模块
负责构造各个已知示例系统（标准模型、边界加倍、扭曲 b-余切提升、Galilean 子群系统、
二维反例、非闭负对照），每个条目附带可执行的预期事实
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.geometry.chart.bfunction import BFunction
from src.geometry.chart.chart import Chart
from src.geometry.chart.expressions import Coord, add, mul
from src.geometry.forms.bforms import BForm, d_of_b_coefficients
from src.geometry.poisson.bsymplectic import BSymplecticStructure, residue_split
from src.integrable.systems.layout import standard_model_form
from src.integrable.systems.nc_system import NCBSystem, verify_system
from src.utils.errors import GalleryError, InputContractError, NotABFunctionError
from src.utils.sampling import SamplePlan

logger = logging.getLogger(__name__)

GALILEAN_VARIANTS = ("translations", "so3_r3", "s1_r3_r3", "b_translations", "b_s1", "b_x1")
CONDITIONS = (
    "condition_1_independence",
    "condition_2_involution",
    "condition_3_dimension",
    "condition_4_smooth_independence",
)


@dataclass
class ExpectedFact:
    """
    可执行的预期事实

    Args:
        name: 名称
        check: (entry, plan) -> bool
        description: 说明
    """

    name: str
    check: object
    description: str = ""


@dataclass
class GalleryEntry:
    """
    Args:
        name: 条目名
        system: NCBSystem
        facts: 预期事实列表
        expected_conditions: {条件名: 预期是否通过}
        extras: 构造过程中的附加对象（Liouville 形式、底系统等）
    """

    name: str
    system: NCBSystem
    facts: list = field(default_factory=list)
    expected_conditions: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def structure(self):
        return self.system.structure

    @property
    def chart(self):
        return self.system.chart

    def verify(self, plan=None):
        return verify_system(self.system, plan or SamplePlan())

    def check_facts(self, plan=None):
        """
        逐条执行预期事实

        Returns:
            dict: {事实名: 是否成立}
        """
        plan = plan or SamplePlan()
        results = {}
        report = self.verify(plan)
        for condition, expected in self.expected_conditions.items():
            results[f"verifier:{condition}"] = report.get(condition).passed == expected
        for fact in self.facts:
            try:
                results[fact.name] = bool(fact.check(self, plan))
            except Exception as e:  # noqa: BLE001 - 事实执行失败记为不成立
                logger.warning("条目 %s 的事实 %s 执行失败: %s", self.name, fact.name, e)
                results[fact.name] = False
        return results

    def to_json(self):
        return self.system.to_json()


def _all_pass():
    return {name: True for name in CONDITIONS}


def _symplectic_form(chart, pairs):
    """Σ dx∧dy，pairs 为坐标编号对"""
    slot = chart.coord_slots
    return BForm.from_dict(chart, 2, {(slot[a], slot[b]): 1.0 for a, b in pairs})


def _max_abs(values):
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values))) if values.size else 0.0


# ---------------------------------------------------------------------------
# 标准模型
# ---------------------------------------------------------------------------
def standard_model(r, s, c, radius=1.0):
    """
    T^r × B^s 上的标准系统 (log|t|, a_2, ..., a_r, p_1, q_1, ...)

    Raises:
        GalleryError: r < 1、s < r 或 s - r 为奇数
    """
    try:
        chart, omega = standard_model_form(r, s, c, radius)
    except InputContractError as e:
        raise GalleryError(str(e)) from e
    integrals = [BFunction.log_t(1.0)]
    integrals += [Coord(chart.index(f"a{i}")) for i in range(2, r + 1)]
    for k in range(1, (s - r) // 2 + 1):
        integrals += [Coord(chart.index(f"p{k}")), Coord(chart.index(f"q{k}"))]
    system = NCBSystem(BSymplecticStructure(omega), tuple(integrals), r, f"standard_model({r},{s},{c})")
    theta1_slot = chart.coord_slots[chart.index("theta1")]

    def residue_is_minus_c(entry, plan):
        residue = residue_split(entry.structure.omega).residue
        return abs(residue.coefficient((theta1_slot,)).evaluate(np.zeros(chart.dim)) + c) < 1e-12

    def ell_blocks(entry, plan):
        return entry.system.ell == (s - r) // 2 == sum(name.startswith("p") for name in chart.names)

    def commuting_rows_vanish(entry, plan):
        points = plan.bulk_points(chart, avoid_z=True)
        sys = entry.system
        return all(
            _max_abs(entry.structure.bracket_values(sys.integrals[i], sys.integrals[j], points)) < 1e-12
            for i in range(r) for j in range(sys.s)
        )

    facts = [
        ExpectedFact("residue_is_minus_c_dtheta1", residue_is_minus_c, "c·dθ_1∧dt/t 的留数为 -c·dθ_1"),
        ExpectedFact("ell_transverse_blocks", ell_blocks, "ℓ = (s - r)/2 个横截辛块"),
        ExpectedFact("commuting_rows_vanish", commuting_rows_vanish, "括号表前 r 行为 0"),
    ]
    return GalleryEntry(system.name, system, facts, _all_pass(), {"c": float(c), "r": r, "s": s})


def sheared_model(r=2, s=2, c=1.0, shear=0.1):
    """
    θ_1 错切后的标准模型：旧角 θ_1 = θ_1' + shear·(a_2 + a_2²/2)，
    ω = c·dθ_1∧dt/t + c·shear·(1 + a_2)·dt/t∧da_2 + Σ dθ_i∧da_i + Σ dp_k∧dq_k

    变换保体积，积分不变；θ = 0 切片不再是拉格朗日截面。

    Raises:
        GalleryError: r < 2
    """
    if r < 2:
        raise GalleryError("错切需要 a_2，r 至少为 2")
    entry = standard_model(r, s, c)
    chart = entry.chart
    a2 = chart.index("a2")
    a2_slot = chart.coord_slots[a2]
    terms = dict(entry.structure.omega.terms)
    terms[(0, a2_slot)] = float(c) * float(shear) * (Coord(a2) + 1.0)
    omega = BForm.from_dict(chart, 2, terms)
    name = f"sheared_model({r},{s},{c},{shear})"
    system = NCBSystem(BSymplecticStructure(omega), entry.system.integrals, r, name)

    def expected_angle(points):
        X = np.atleast_2d(points)
        a = X[:, a2]
        return np.mod(X[:, chart.index("theta1")] - shear * (a + 0.5 * a ** 2), 1.0)

    def shear_term(entry, plan):
        points = plan.bulk_points(chart, avoid_z=True)
        Omega = entry.structure.matrix(points)
        return _max_abs(Omega[:, 0, a2_slot] - c * shear * (1.0 + points[:, a2])) < 1e-12

    facts = [ExpectedFact("shear_term", shear_term, "dt/t∧da_2 系数为 c·shear·(1 + a_2)")]
    extras = {"c": float(c), "r": r, "s": s, "shear": float(shear), "expected_angle": expected_angle}
    return GalleryEntry(name, system, facts, _all_pass(), extras)


def splitting_model(s=3, c=1.0):
    """环作用分裂出的局部模型 (log|t|, f_1, ..., f_s)，即秩 1 标准模型"""
    entry = standard_model(1, s, c)
    entry.name = f"splitting_model({s},{c})"
    return entry


# ---------------------------------------------------------------------------
# 边界加倍
# ---------------------------------------------------------------------------
def planar_base():
    """R² 上 ω = dx∧dy 的系统 (x)"""
    chart = Chart(("x", "y"))
    omega = _symplectic_form(chart, [(0, 1)])
    return NCBSystem(BSymplecticStructure(omega), (Coord(0),), 1, "planar(x)")


def _remap_integral(f, mapping):
    return BFunction(f.c, f.g.remap(mapping), f.shift.remap(mapping))


def boundary_double(base=None, plan=None):
    """
    N × (h, θ) 环带，ω = ω_N + (1/h)dh∧dθ，积分 (log|h|, f_1, ..., f_s)，秩 r + 1

    Raises:
        GalleryError: 底系统不是光滑辛系统或未通过校验
    """
    base = base or planar_base()
    if base.chart.t_index is not None:
        raise GalleryError("底系统必须在辛图卡上（不含 Z）")
    if any(not f.is_smooth for f in base.integrals):
        raise GalleryError("底系统的积分必须是光滑函数")
    if not verify_system(base, plan or SamplePlan()).passed:
        raise GalleryError(f"底系统 {base.name} 未通过校验")

    n = base.chart.dim
    names = base.chart.names + ("h", "theta_h")
    chart = Chart(
        names, t_index=n, box=base.chart.box + ((-1.0, 1.0), (0.0, 1.0)),
        periodic=base.chart.periodic + (False, True),
    )
    mapping = {k: k for k in range(n)}
    # (1/h)dh∧dθ = (dh/h)∧dθ
    omega = base.structure.omega.remap(chart, mapping) + BForm.from_dict(
        chart, 2, {(0, chart.coord_slots[n + 1]): 1.0}
    )
    integrals = (BFunction.log_t(1.0),) + tuple(_remap_integral(f, mapping) for f in base.integrals)
    system = NCBSystem(BSymplecticStructure(omega), integrals, base.rank + 1, f"boundary_double({base.name})")

    def z_is_h(entry, plan):
        return entry.chart.names[entry.chart.t_index] == "h"

    def base_brackets_unchanged(entry, plan):
        base_points = plan.bulk_points(base.chart)
        points = np.hstack([base_points, np.full((base_points.shape[0], 1), 0.5), np.zeros((base_points.shape[0], 1))])
        worst = 0.0
        for i, f in enumerate(base.integrals):
            for j, g in enumerate(base.integrals):
                before = base.structure.bracket_values(f, g, base_points)
                after = entry.structure.bracket_values(integrals[i + 1], integrals[j + 1], points)
                worst = max(worst, _max_abs(before - after))
        return worst < 1e-12

    facts = [
        ExpectedFact("critical_hypersurface_is_h", z_is_h, "Z = {h = 0}"),
        ExpectedFact("base_brackets_unchanged", base_brackets_unchanged, "乘积不改变底积分的括号"),
    ]
    return GalleryEntry(system.name, system, facts, _all_pass(), {"base": base})


# ---------------------------------------------------------------------------
# 扭曲 b-余切提升
# ---------------------------------------------------------------------------
def moment_map(liouville, generator):
    """
    μ_X = <λ, X>：liouville 为 {槽位: 系数 b-函数}，generator 为 {槽位: 常数分量}
    """
    total = BFunction()
    for slot, weight in generator.items():
        if slot in liouville and weight != 0.0:
            total = total + liouville[slot] * weight
    return total


def twisted_lift(n=2):
    """
    S^1 × R^{n-1} 的平移作用的扭曲 b-余切提升

    坐标 (θ, a, x_1, y_1, ...)，Liouville 形式 λ = log|a|dθ + Σ y_i dx_i，ω = -dλ，
    Z = {a = 0}；动量映射为 (log|a|, y_1, ..., y_{n-1})。
    """
    if n < 1:
        raise GalleryError("n 必须至少为 1")
    names = ["theta", "a"]
    for i in range(1, n):
        names += [f"x{i}", f"y{i}"]
    periodic = tuple(name == "theta" for name in names)
    box = tuple((0.0, 1.0) if p else (-1.0, 1.0) for p in periodic)
    chart = Chart(tuple(names), t_index=1, box=box, periodic=periodic)
    slot = {name: chart.coord_slots[k] for k, name in enumerate(names)}

    liouville = {slot["theta"]: BFunction.log_t(1.0)}
    for i in range(1, n):
        liouville[slot[f"x{i}"]] = BFunction.smooth(Coord(chart.index(f"y{i}")))
    omega = -d_of_b_coefficients(chart, {(s_,): f for s_, f in liouville.items()})

    generators = [{slot["theta"]: 1.0}] + [{slot[f"x{i}"]: 1.0} for i in range(1, n)]
    integrals = tuple(moment_map(liouville, g) for g in generators)
    system = NCBSystem(BSymplecticStructure(omega), integrals, n, f"twisted_lift({n})")

    def rotation_gives_log(entry, plan):
        f = integrals[0]
        points = plan.bulk_points(chart, avoid_z=True)
        return f.c == 1.0 and _max_abs(f.g.evaluate(points)) == 0.0

    def translation_gives_y(entry, plan):
        if n < 2:
            return True
        points = plan.bulk_points(chart, avoid_z=True)
        f = integrals[1]
        return f.is_smooth and _max_abs(f.g.evaluate(points) - points[:, chart.index("y1")]) == 0.0

    def residue_is_dtheta(entry, plan):
        residue = residue_split(entry.structure.omega).residue
        coefficient = residue.coefficient((slot["theta"],)).evaluate(np.zeros(chart.dim))
        others = [index for index, _ in residue.terms if index != (slot["theta"],)]
        return abs(abs(coefficient) - 1.0) < 1e-12 and not others

    facts = [
        ExpectedFact("rotation_moment_is_log_a", rotation_gives_log, "ι_{∂θ} λ = log|a|"),
        ExpectedFact("translation_moment_is_y1", translation_gives_y, "ι_{∂x_1} λ = y_1"),
        ExpectedFact("residue_is_pm_dtheta", residue_is_dtheta, "-dλ 沿 {a = 0} 的留数为 ±dθ"),
    ]
    return GalleryEntry(system.name, system, facts, _all_pass(), {"liouville": liouville})


# ---------------------------------------------------------------------------
# Galilean 子群系统
# ---------------------------------------------------------------------------
GALILEAN_NAMES = ("x1", "x2", "x3", "y1", "y2", "y3")


def _x(i):
    return Coord(i - 1)


def _y(i):
    return Coord(i + 2)


def angular_momentum():
    """J = x × y 的分量 (f_1, f_2, f_3)"""
    return (
        add(mul(_x(2), _y(3)), mul(-1.0, _x(3), _y(2))),
        add(mul(_x(3), _y(1)), mul(-1.0, _x(1), _y(3))),
        add(mul(_x(1), _y(2)), mul(-1.0, _x(2), _y(1))),
    )


def rotation_generators():
    """e_i^# 的坐标分量（x1, x2, x3, y1, y2, y3 顺序）"""
    x = {i: _x(i) for i in (1, 2, 3)}
    y = {i: _y(i) for i in (1, 2, 3)}
    e1 = {"x2": x[3], "y3": mul(-1.0, y[2]), "x3": mul(-1.0, x[2]), "y2": y[3]}
    e2 = {"x3": x[1], "y1": mul(-1.0, y[3]), "x1": mul(-1.0, x[3]), "y3": y[1]}
    e3 = {"x1": x[2], "y2": mul(-1.0, y[1]), "x2": mul(-1.0, x[1]), "y1": y[2]}
    return [e1, e2, e3]


def galilean_chart(b_version):
    if b_version:
        return Chart(GALILEAN_NAMES, t_index=3)
    return Chart(GALILEAN_NAMES)


def galilean_form(chart):
    """辛：Σ dx_i∧dy_i；b：(dy_1/y_1)∧dx_1 + Σ_{i>=2} dy_i∧dx_i（按原样存储）"""
    slot = chart.coord_slots
    if chart.t_index is None:
        return _symplectic_form(chart, [(0, 3), (1, 4), (2, 5)])
    terms = {(0, slot[0]): 1.0}
    # dy_i∧dx_i = -dx_i∧dy_i
    for i in (2, 3):
        terms[(slot[i - 1], slot[i + 2])] = -1.0
    return BForm.from_dict(chart, 2, terms)


def galilean(variant):
    """
    Galilean 群子群作用给出的系统

    Args:
        variant: translations | so3_r3 | s1_r3_r3 | b_translations | b_s1 | b_x1

    Raises:
        GalleryError: 未知变体
    """
    if variant not in GALILEAN_VARIANTS:
        raise GalleryError(f"未知的 Galilean 变体 {variant!r}，可选 {GALILEAN_VARIANTS}")
    b_version = variant.startswith("b_")
    chart = galilean_chart(b_version)
    structure = BSymplecticStructure(galilean_form(chart))
    f1, f2, f3 = angular_momentum()
    x = [_x(i) for i in (1, 2, 3)]
    y = [_y(i) for i in (1, 2, 3)]
    log_y1 = BFunction.log_t(1.0)
    expected = _all_pass()
    facts = []

    if variant == "translations":
        integrals, rank = tuple(x + y), 0
    elif variant == "b_translations":
        integrals, rank = (x[0], x[1], x[2], log_y1, y[1], y[2]), 0
    elif variant == "so3_r3":
        integrals, rank = (f1, f2, f3, x[0], x[1], x[2]), 0
        # x·J ≡ 0，b-微分处处线性相关
        expected["condition_1_independence"] = False
        facts += _so3_facts(structure)
    elif variant == "s1_r3_r3":
        integrals, rank = (y[0], f1, x[1], x[2], y[1]), 1
    elif variant == "b_s1":
        integrals, rank = (log_y1, f1, x[1], x[2], y[1]), 1
    else:
        integrals, rank = (x[0], f1, x[1], x[2], y[1]), 1
        expected["condition_4_smooth_independence"] = False
        facts.append(ExpectedFact("x1_field_vanishes_on_z", _x1_field_vanishes, "X_{x_1} = ±y_1∂/∂y_1，在 Z 上为 0"))

    system = NCBSystem(structure, integrals, rank, f"galilean:{variant}")
    return GalleryEntry(system.name, system, facts, expected)


def _so3_facts(structure):
    f1, f2, f3 = angular_momentum()

    def cyclic(entry, plan):
        points = np.random.default_rng(plan.seed).uniform(-1.0, 1.0, size=(100, 6))
        S = entry.structure
        return max(
            _max_abs(S.bracket_values(f1, f2, points) - f3.evaluate(points)),
            _max_abs(S.bracket_values(f2, f3, points) - f1.evaluate(points)),
            _max_abs(S.bracket_values(f3, f1, points) - f2.evaluate(points)),
        ) < 1e-12

    def fundamental_fields(entry, plan):
        points = np.random.default_rng(plan.seed).uniform(-1.0, 1.0, size=(50, 6))
        worst = 0.0
        for f, generator in zip((f1, f2, f3), rotation_generators()):
            expected = np.zeros((points.shape[0], 6))
            for name, expr in generator.items():
                expected[:, GALILEAN_NAMES.index(name)] = expr.evaluate(points)
            worst = max(worst, _max_abs(entry.structure.hamiltonian_field(f).smooth_components(points) - expected))
        return worst < 1e-12

    def b_extension_rejected(entry, plan):
        # e_2 在 b-结构下的哈密顿函数 x_3·log|y_1| - x_1·y_3
        try:
            BFunction.from_log_expansion(_x(3), mul(-1.0, _x(1), _y(3)))
        except NotABFunctionError:
            return True
        return False

    return [
        ExpectedFact("so3_cyclic_brackets", cyclic, "{f_1,f_2} = f_3 等循环关系"),
        ExpectedFact("fundamental_fields_match", fundamental_fields, "X_{f_i} = e_i^#"),
        ExpectedFact("b_extension_rejected", b_extension_rejected, "x_3·log|y_1| - x_1·y_3 不是 b-函数"),
    ]


def _x1_field_vanishes(entry, plan):
    chart = entry.chart
    field_ = entry.structure.hamiltonian_field(entry.system.integrals[0])
    on_z = plan.z_points(chart)
    bulk = plan.bulk_points(chart, avoid_z=True)
    smooth_bulk = field_.smooth_components(bulk)
    # 光滑分量只有 y_1 方向，且正比于 y_1
    only_y1 = _max_abs(np.delete(smooth_bulk, chart.t_index, axis=1)) < 1e-12
    proportional = _max_abs(np.abs(smooth_bulk[:, chart.t_index]) - np.abs(bulk[:, chart.t_index])) < 1e-12
    return _max_abs(field_.smooth_components(on_z)) == 0.0 and only_y1 and proportional


# ---------------------------------------------------------------------------
# 反例与负对照
# ---------------------------------------------------------------------------
def counterexample_2d(log_variant=False):
    """
    ω = (1/t)dt∧dz 上的 (z)：条件 (1)-(3) 通过、(4) 失败；
    log_variant 把 z 换成 log|t|，得到通过校验的秩 1 系统
    """
    chart = Chart(("t", "z"), t_index=0)
    omega = BForm.from_dict(chart, 2, {(0, 1): 1.0})
    structure = BSymplecticStructure(omega)
    if log_variant:
        system = NCBSystem(structure, (BFunction.log_t(1.0),), 1, "counterexample_2d_log")
        return GalleryEntry(system.name, system, [], _all_pass())

    system = NCBSystem(structure, (Coord(1),), 1, "counterexample_2d")
    expected = _all_pass()
    expected["condition_4_smooth_independence"] = False

    def field_vanishes_on_z(entry, plan):
        field_ = entry.structure.hamiltonian_field(entry.system.integrals[0])
        return _max_abs(field_.smooth_components(plan.z_points(chart))) == 0.0

    def dz_nonzero(entry, plan):
        dF = entry.system.differentials(plan.bulk_points(chart))
        return float(np.min(np.linalg.norm(dF[:, 0, :], axis=1))) > 0.5

    facts = [
        ExpectedFact("field_vanishes_on_z", field_vanishes_on_z, "X_z = ±t∂/∂t 在 Z 上为 0"),
        ExpectedFact("dz_nonzero", dz_nonzero, "dz 处处非零"),
    ]
    return GalleryEntry(system.name, system, facts, expected)


def non_closed_control():
    """
    非闭 2-形式 dt/t∧dz + dx∧dy + x·dz∧dy 与三元组 (log|t|, y, x)，Jacobi 残差约为 1
    """
    chart = Chart(("t", "z", "x", "y"), t_index=0)
    slot = chart.coord_slots
    omega = BForm.from_dict(chart, 2, {
        (0, slot[1]): 1.0,
        (slot[2], slot[3]): 1.0,
        (slot[1], slot[3]): Coord(2),
    })
    structure = BSymplecticStructure(omega)
    triple = (BFunction.log_t(1.0), Coord(3), Coord(2))
    system = NCBSystem(structure, triple, 1, "non_closed_control")

    def jacobi_fails(entry, plan):
        points = plan.bulk_points(chart, avoid_z=True)
        return entry.structure.jacobi_residual(*entry.system.integrals, points) > 0.1

    def not_closed(entry, plan):
        return not entry.structure.closedness_form.is_zero

    facts = [
        ExpectedFact("jacobi_residual_large", jacobi_fails, "Jacobi 残差 > 0.1"),
        ExpectedFact("form_not_closed", not_closed, "dω ≠ 0"),
    ]
    return GalleryEntry(system.name, system, facts, {}, {"triple": triple})


# ---------------------------------------------------------------------------
# 坐标重排
# ---------------------------------------------------------------------------
def scramble(entry, permutation):
    """
    按置换重排坐标（保体积）：新坐标 i 为旧坐标 permutation[i]

    Raises:
        GalleryError: permutation 不是置换
    """
    chart = entry.chart
    permutation = [int(p) for p in permutation]
    if sorted(permutation) != list(range(chart.dim)):
        raise GalleryError(f"{permutation} 不是 0..{chart.dim - 1} 的置换")
    mapping = {old: new for new, old in enumerate(permutation)}
    new_chart = Chart(
        tuple(chart.names[p] for p in permutation),
        t_index=None if chart.t_index is None else mapping[chart.t_index],
        box=tuple(chart.box[p] for p in permutation),
        periodic=tuple(chart.periodic[p] for p in permutation),
    )
    omega = entry.structure.omega.remap(new_chart, mapping)
    integrals = tuple(_remap_integral(f, mapping) for f in entry.system.integrals)
    system = NCBSystem(BSymplecticStructure(omega), integrals, entry.system.rank, f"scrambled({entry.name})")
    extras = dict(entry.extras, permutation=permutation)
    return GalleryEntry(system.name, system, [], dict(entry.expected_conditions), extras)


# ---------------------------------------------------------------------------
# 名称解析
# ---------------------------------------------------------------------------
def _parse_numbers(text, count, defaults):
    values = [v for v in text.split(",") if v] if text else []
    if len(values) > count:
        raise GalleryError(f"参数过多: {text!r}")
    return [type(d)(v) for d, v in zip(defaults, values)] + list(defaults[len(values):])


def get_entry(name):
    """
    按名称取条目，例如 standard_model:2,2,3、galilean:b_s1、counterexample_2d

    Raises:
        GalleryError: 未知名称或参数错误
    """
    base, _, arguments = name.partition(":")
    try:
        if base == "standard_model":
            r, s, c = _parse_numbers(arguments, 3, (1, 1, 1.0))
            return standard_model(r, s, c)
        if base == "sheared_model":
            r, s, c, shear = _parse_numbers(arguments, 4, (2, 2, 1.0, 0.1))
            return sheared_model(r, s, c, shear)
        if base == "splitting_model":
            s, c = _parse_numbers(arguments, 2, (3, 1.0))
            return splitting_model(s, c)
        if base == "galilean":
            return galilean(arguments or "b_s1")
        if base == "boundary_double":
            return boundary_double()
        if base == "twisted_lift":
            (n,) = _parse_numbers(arguments, 1, (2,))
            return twisted_lift(n)
        if base == "counterexample_2d":
            return counterexample_2d(arguments == "log")
        if base == "non_closed_control":
            return non_closed_control()
    except ValueError as e:
        raise GalleryError(f"条目 {name!r} 的参数不合法: {e}") from e
    raise GalleryError(f"未知的示例条目 {name!r}")


def catalog():
    """全部默认条目"""
    entries = [
        standard_model(1, 1, 1.0),
        standard_model(2, 2, 3.0),
        standard_model(1, 3, 1.0),
        sheared_model(),
        splitting_model(),
        boundary_double(),
        twisted_lift(2),
        counterexample_2d(),
        counterexample_2d(log_variant=True),
        non_closed_control(),
    ]
    entries += [galilean(v) for v in GALILEAN_VARIANTS]
    return entries
