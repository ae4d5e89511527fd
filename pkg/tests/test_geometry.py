import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cones.errors import DimensionMismatch, EmptyIntersection, EmptySet
from cones.geometry import (
    Ball,
    Box,
    Cut,
    Halfspace,
    assert_nested,
    feasible_mask,
    intersect_halfspace,
    set_from_json,
)
from cones.instances import gen_sc_lower_bound

SQRT2 = np.sqrt(2.0)


def test_contains_box_interior():
    assert Box([0, 0], [1, 1]).contains([0.5, 0.5], 0.0)


def test_contains_ball_boundary_slack():
    assert Ball([0, 0], 1.0).contains([1 + 1e-12, 0], 1e-9)
    assert not Ball([0, 0], 1.0).contains([1 + 1e-6, 0], 1e-9)


def test_contains_cut_excludes_below_diagonal():
    S = Cut(Box([0, 0], [10, 10]), (Halfspace([1 / SQRT2, 1 / SQRT2], 3 / SQRT2),))
    assert not S.contains([1, 1], 0.0)  # 1 + 1 < 3
    assert S.contains([3, 0], 1e-12)


def test_contains_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        Box([0, 0], [1, 1]).contains([0.5], 0.0)


def test_project_box_clamp():
    np.testing.assert_allclose(Box([0, 0], [1, 1]).project([2, 0.5]), [1, 0.5])


def test_project_ball_radial():
    np.testing.assert_allclose(Ball([0, 0], 1.0).project([3, 4]), [0.6, 0.8])


def test_project_cut_diagonal_split():
    S = intersect_halfspace(Box([0, 0], [10, 10]), Halfspace([1, 1], 3))
    np.testing.assert_allclose(S.project([1, 1]), [1.5, 1.5], atol=1e-12)


def test_intersect_redundant_cut_keeps_membership():
    S = intersect_halfspace(Box([0, 0], [1, 1]), Halfspace([1, 0], 0.0))
    for p in ([0, 0], [1, 1], [0.3, 0.9]):
        assert S.contains(p, 1e-12) == Box([0, 0], [1, 1]).contains(p, 1e-12)


def test_intersect_disjoint_raises():
    with pytest.raises(EmptyIntersection):
        intersect_halfspace(Box([0, 0], [1, 1]), Halfspace([1, 0], 2.0))


def test_intersect_vertex_check():
    S = intersect_halfspace(Box([0, 0], [10, 10]), Halfspace([1, 1], 3))
    assert S.contains([3, 0], 1e-12)
    assert not S.contains([1, 1], 0.0)


def test_is_empty_cases():
    assert not Box([0, 0], [1, 1]).is_empty()
    assert not Ball([2, 3], 0.0).is_empty()
    S = Cut(
        Box([0, 0], [1, 1]),
        (Halfspace([1, 0], 0.6), Halfspace([-1, 0], -0.4)),
    )
    assert S.is_empty()


def test_diameter_bounds():
    assert Box([0, 0], [3, 4]).diameter_bound() == pytest.approx(5.0)
    assert Ball([1, 1], 2.0).diameter_bound() == pytest.approx(4.0)
    S = Cut(Box([0, 0], [3, 4]), (Halfspace([1, 0], 2.9),))
    assert S.diameter_bound() == pytest.approx(5.0)


def test_halfspace_normalized():
    h = Halfspace([3, 4], 10)
    assert np.linalg.norm(h.normal) == pytest.approx(1.0)
    assert h.offset == pytest.approx(2.0)
    with pytest.raises(ValueError):
        Halfspace([0, 0], 1.0)


def test_assert_nested_builtins():
    inst = gen_sc_lower_bound(12, 1.0, 4.0)
    rep = assert_nested(inst.sets, samples=100, seed=5)
    assert rep.ok, rep.violations


def test_assert_nested_flags_disjoint_pair():
    rep = assert_nested([Box([0, 0], [1, 1]), Box([2, 2], [3, 3])], samples=8, seed=0)
    assert not rep.ok


def test_empty_box_construction_rejected():
    with pytest.raises(EmptySet):
        Box([1, 0], [0, 1])


@st.composite
def planar_cut_sets(draw):
    lo = np.array([draw(st.floats(-3, 0)), draw(st.floats(-3, 0))])
    span = np.array([draw(st.floats(0.5, 3)), draw(st.floats(0.5, 3))])
    S = Box(lo, lo + span)
    center = lo + span / 2
    for _ in range(draw(st.integers(0, 3))):
        angle = draw(st.floats(0, 2 * np.pi))
        normal = np.array([np.cos(angle), np.sin(angle)])
        shiftx = draw(st.floats(-0.3, 0.3))
        point = center + shiftx * span
        try:
            S = intersect_halfspace(S, Halfspace(normal, float(normal @ point)))
        except EmptyIntersection:
            pass
    return S


@settings(max_examples=120, deadline=None)
@given(
    planar_cut_sets(),
    st.tuples(st.floats(-8, 8), st.floats(-8, 8)),
    st.integers(0, 2**31),
)
def test_projection_contract_properties(S, xy, seed):
    x = np.array(xy)
    p = S.project(x)
    assert S.contains(p, 1e-8)
    q = S.project(p)
    assert np.linalg.norm(q - p) <= 1e-8
    y = S.sample(np.random.default_rng(seed))
    assert np.linalg.norm(p - y) <= np.linalg.norm(x - y) + 1e-8


def test_projection_d3_enumeration():
    S = Cut(
        Box([0, 0, 0], [1, 1, 1]),
        (Halfspace([1, 1, 1], 1.5),),
    )
    p = S.project(np.zeros(3))
    np.testing.assert_allclose(p, [0.5, 0.5, 0.5], atol=1e-10)
    assert S.contains(p, 1e-9)


def test_projection_ball_base_dykstra():
    S = Cut(Ball([0.0, 0.0], 1.0), (Halfspace([0, 1], 0.5),))
    p = S.project(np.array([0.0, -2.0]))
    assert S.contains(p, 1e-8)
    np.testing.assert_allclose(p, [0.0, 0.5], atol=1e-8)


def test_d1_interval_cut():
    S = Cut(Box([0.0], [10.0]), (Halfspace([1.0], 2.0), Halfspace([-1.0], -7.0)))
    np.testing.assert_allclose(S.project([0.0]), [2.0])
    np.testing.assert_allclose(S.project([9.0]), [7.0])
    assert not S.is_empty()


def test_json_roundtrip():
    S = Cut(Box([0, 0], [1, 2]), (Halfspace([1, 1], 0.5),))
    S2 = set_from_json(S.to_json())
    assert S2 == S
    B = Ball([0.5, 0.5], 0.25)
    assert set_from_json(B.to_json()) == B


def test_feasible_mask_matches_contains():
    S = Cut(Box([0, 0], [2, 2]), (Halfspace([1, 1], 1.0),))
    pts = np.random.default_rng(0).uniform(-1, 3, size=(64, 2))
    mask = feasible_mask(S, pts, 1e-9)
    for p, ok in zip(pts, mask):
        assert ok == S.contains(p, 1e-9)
