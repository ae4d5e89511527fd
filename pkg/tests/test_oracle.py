import itertools

import numpy as np
import pytest

from cones.errors import InfeasibleGrid
from cones.geometry import Box
from cones.instances import Instance, gen_directional, gen_frozen, gen_random_1d_lin
from cones.objectives import AbsShift, MaxAbs, SquaredNorm
from cones.oracle import brute_force_min_grid, lin_opt_stable, offline_lin_dp_1d, static_opt
from cones.solvers import minimize_over


def test_static_opt_margin_floor():
    inst = gen_directional(10.0, 5)
    res = static_opt(inst.objective, inst.sets[-1], 5, inst.x0)
    np.testing.assert_allclose(res.path[0], [0, 5], atol=1e-9)
    assert res.value == pytest.approx(25.0, abs=1e-7)


def test_static_opt_zero_loss_floor():
    f = SquaredNorm(2)
    S = Box([0, 0], [1, 1])
    res = static_opt(f, S, 12, [1.0, 1.0])
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.move_from_start == pytest.approx(np.sqrt(2.0))


def test_static_opt_frozen_uses_last_set():
    inst = gen_frozen(7, 50, 1.0, 4.0)
    res = static_opt(inst.objective, inst.sets[-1], inst.T, inst.x0)
    direct = minimize_over(inst.objective, inst.sets[6])
    np.testing.assert_allclose(res.path[0], direct.argmin, atol=1e-10)


def _constant_interval_instance(T, shift, x0):
    domain = Box([0.0], [10.0])
    return Instance(
        family="manual",
        T=T,
        x0=np.array([x0]),
        domain=domain,
        per_step=[AbsShift(shift)] * T,
        sets=[domain] * T,
    )


def test_dp_zero_when_start_at_minimizer():
    inst = _constant_interval_instance(6, 5.0, 5.0)
    res = offline_lin_dp_1d(inst, 1001)
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert all(p[0] == pytest.approx(5.0) for p in res.path)


def test_dp_single_step_tradeoff():
    # one step: min |x - 5| + |x - 0| = 5 attained on [0, 5]
    inst = _constant_interval_instance(1, 5.0, 0.0)
    res = offline_lin_dp_1d(inst, 1001)
    assert res.value == pytest.approx(5.0, abs=1e-9)
    assert 0.0 - 1e-9 <= res.path[0][0] <= 5.0 + 1e-9


def test_dp_matches_exhaustive_enumeration_tiny():
    for seed in (0, 1, 2):
        inst = gen_random_1d_lin(4, 50 + seed)
        res = offline_lin_dp_1d(inst, 21)
        lo, hi = inst.domain.bounding_box()
        grid = np.linspace(float(lo[0]), float(hi[0]), 21)
        feas = [
            [g for g in grid if inst.sets[t].contains(np.array([g]), inst.sets[t].feas_tol())]
            for t in range(4)
        ]
        best = np.inf
        for path in itertools.product(*feas):
            cost = abs(path[0] - float(inst.x0[0]))
            for t in range(4):
                cost += inst.per_step[t].eval(np.array([path[t]]))
                if t:
                    cost += abs(path[t] - path[t - 1])
            best = min(best, cost)
        assert res.value == pytest.approx(best, rel=1e-12)


def test_dp_refinement_study():
    for seed in range(4):
        inst = gen_random_1d_lin(40, seed)
        v1 = offline_lin_dp_1d(inst, 1001).value
        v2 = offline_lin_dp_1d(inst, 2001).value
        assert abs(v1 - v2) < 1e-3 * (1 + abs(v2))


def test_dp_value_refinement_monotone_tendency():
    # finer grids can only find equal or better paths, up to grid alignment
    inst = gen_random_1d_lin(25, 11)
    v_coarse = offline_lin_dp_1d(inst, 501).value
    v_fine = offline_lin_dp_1d(inst, 2001).value
    assert v_fine <= v_coarse + 1e-6


def test_dp_path_is_feasible():
    inst = gen_random_1d_lin(30, 8)
    res = offline_lin_dp_1d(inst, 501)
    for t, p in enumerate(res.path):
        assert inst.sets[t].contains(p, 1e-8)


def test_lin_opt_stable_guard():
    inst = gen_random_1d_lin(30, 8)
    res = lin_opt_stable(inst, 2001)
    assert res.grid_resolution == 2001


def test_dp_grid_too_small():
    with pytest.raises(InfeasibleGrid):
        offline_lin_dp_1d(_constant_interval_instance(2, 1.0, 0.0), 2)


def test_brute_force_examples():
    res = brute_force_min_grid(SquaredNorm(2), Box([1, 1], [2, 2]), 101)
    np.testing.assert_allclose(res.path[0], [1, 1])
    assert res.value == pytest.approx(2.0)

    from cones.instances import gen_convex_lower_bound

    inst = gen_convex_lower_bound(6, 4.0)
    res = brute_force_min_grid(MaxAbs(2), inst.sets[0], 201)
    exact = minimize_over(MaxAbs(2), inst.sets[0])
    assert res.value >= exact.value - 1e-9
    assert res.value - exact.value <= 0.05


def test_brute_force_rejects_high_dim():
    with pytest.raises(InfeasibleGrid):
        brute_force_min_grid(SquaredNorm(3), Box([0, 0, 0], [1, 1, 1]), 11)
