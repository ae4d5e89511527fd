import math

import numpy as np
import pytest

from cones.algorithms import AB_MOVE, GREEDY, JUMP, LAZY, lin_cost, make_policy
from cones.errors import ParameterError
from cones.geometry import Box
from cones.harness import record_oblivious, run
from cones.instances import (
    adversary_sharp,
    gen_convex_lower_bound,
    gen_frozen,
    gen_random_1d_lin,
    gen_sc_lower_bound,
)
from cones.objectives import AbsShift, SquaredNorm

SQRT2 = np.sqrt(2.0)


def test_frugal_first_step_jumps_when_projection_suboptimal():
    inst = gen_sc_lower_bound(8, 1.0, 4.0)
    pol = make_policy("frugal")
    pol.start(inst.x0)
    out = pol.step(1, inst.objective, inst.sets[0])
    assert out.kind == JUMP
    assert pol.F == pytest.approx(out.diagnostics["v_t"], rel=1e-9)


def test_frugal_lazy_when_holding_the_minimizer():
    f = SquaredNorm(2)
    S = Box([1, 1], [2, 2])
    pol = make_policy("frugal")
    pol.start(np.array([1.0, 1.0]))
    out = pol.step(1, f, S)
    assert out.kind == LAZY
    np.testing.assert_allclose(out.action, [1, 1])


def test_frugal_frozen_lazy_window_then_single_jump():
    inst = gen_frozen(7, 200, 1.0, 4.0)
    tr = run(make_policy("frugal"), inst)
    assert tr.jump_times == [167]
    kinds = {r.t: r.kind for r in tr.records}
    assert all(kinds[t] == LAZY for t in range(1, 167))


def test_greedy_constant_set_stops_moving():
    f = SquaredNorm(2)
    S = Box([1, 1], [2, 2])
    pol = make_policy("greedy")
    pol.start(np.array([2.0, 2.0]))
    first = pol.step(1, f, S)
    second = pol.step(2, f, S)
    np.testing.assert_allclose(first.action, second.action)
    assert np.linalg.norm(second.action - first.action) == 0.0


def test_greedy_oscillation_moves_at_least_side_length():
    inst = gen_convex_lower_bound(12, 4.0)
    tr = run(make_policy("greedy"), inst)
    D = inst.meta["D"]
    # the near-minimizer surrogate (width 1e-8 divided by the cut slope) can
    # shave up to ~2e-2 off the idealized per-step distance once the descent
    # reaches its floor
    for r in tr.records[1:]:
        assert r.move_inc >= 0.99 * D / SQRT2


def test_lsp_regret_cap_and_stable_phase_on_constant_set():
    T = 40
    inst = gen_sc_lower_bound(T, 1.0, 4.0)
    tr = run(make_policy("lsp", eps=1.0 / T), inst)
    assert tr.final().regret_cum <= 1.0 + 1e-6
    # constant feed: no transitions after the opening phase
    f = SquaredNorm(2)
    S = Box([1, 1], [2, 2])
    pol = make_policy("lsp", eps=0.5)
    pol.start(np.array([2.0, 2.0]))
    pol.step(1, f, S)
    for t in range(2, 6):
        out = pol.step(t, f, S)
        assert out.diagnostics["phase"] == 1


def test_lsp_phase_count_bound():
    inst = gen_sc_lower_bound(60, 1.0, 4.0)
    eps = 0.1
    tr = run(make_policy("lsp", eps=eps), inst)
    G = inst.objective.regularity.lipschitz_G
    D = inst.domain.diameter_bound()
    assert max(r.phase for r in tr.records) <= G * D / eps + 1


def test_gap_frugal_threshold_accumulates_inverse_squares():
    inst = gen_sc_lower_bound(8, 1.0, 4.0)
    pol = make_policy("gap_frugal")
    pol.start(inst.x0)
    for t in (1, 2, 3):
        pol.step(t, inst.objective, inst.sets[t - 1])
    assert pol.C == pytest.approx(49.0 / 36.0, rel=1e-12)


def test_gap_frugal_gap_condition_alone_allows_lazy():
    # tiny suboptimality gap (below 1/t^2) keeps the lazy branch even with an
    # exhausted budget
    f = AbsShift(0.0)
    S = Box([0.5], [1.0])
    pol = make_policy("gap_frugal")
    pol.start(np.array([1.0]))
    pol.F = 1e9  # force budget failure
    pol.t = 1
    out = pol.step(2, AbsShift(1.0 - 1e-9), S)
    assert out.kind == LAZY
    assert out.diagnostics["gap_ok"] and not out.diagnostics["budget_ok"]


def test_ab_component_and_action():
    pol = make_policy("ab")
    pol.start(np.array([0.0]))
    out = pol.step(1, AbsShift(5.0), Box([0.0], [10.0]))
    assert out.diagnostics["comp_lo"] == pytest.approx(0.0, abs=1e-9)
    assert out.diagnostics["comp_hi"] == pytest.approx(2.5, abs=1e-6)
    assert out.action[0] == pytest.approx(2.5, abs=1e-6)
    assert out.kind == AB_MOVE


def test_ab_zero_cost_stay():
    pol = make_policy("ab")
    pol.start(np.array([3.0]))
    out = pol.step(1, AbsShift(3.0), Box([0.0], [10.0]))
    assert out.action[0] == pytest.approx(3.0, abs=1e-9)


def test_ab_requires_dimension_one():
    pol = make_policy("ab")
    pol.start(np.zeros(2))
    with pytest.raises(ParameterError):
        pol.step(1, SquaredNorm(2), Box([0, 0], [1, 1]))


def test_ab_feasible_within_service_budget():
    inst = gen_random_1d_lin(60, 5)
    tr = run(make_policy("ab"), inst)
    x_prev = inst.x0
    for t, r in enumerate(tr.records, start=1):
        z = inst.sets[t - 1].project(x_prev)
        assert abs(float(r.x[0] - z[0])) <= inst.per_step[t - 1].eval(r.x) + 1e-9
        x_prev = r.x


def test_lin_cost_examples():
    class Rec:
        def __init__(self, f_x, move_inc):
            self.f_x, self.move_inc = f_x, move_inc

    class Tr:
        def __init__(self, recs):
            self.records = recs

    assert lin_cost(Tr([Rec(2.0, 0.0)])) == pytest.approx(2.0)
    assert lin_cost(Tr([Rec(0.0, 1.0), Rec(0.0, 1.0)])) == pytest.approx(2.0)
    # the chasing example above: service 2.5 plus movement 2.5
    assert lin_cost(Tr([Rec(2.5, 2.5)])) == pytest.approx(5.0)


def test_frugal_running_budget_invariant_everywhere():
    for inst in (
        gen_sc_lower_bound(64, 1.0, 4.0),
        gen_convex_lower_bound(32, 4.0),
        gen_frozen(7, 120, 1.0, 4.0),
    ):
        tr = run(make_policy("frugal"), inst)
        assert max(r.regret_cum for r in tr.records) <= 1e-6


def test_gap_frugal_budget_invariant():
    from cones.instances import gen_directional

    tr = run(make_policy("gap_frugal"), gen_directional(80.0, 70))
    C = 0.0
    for r in tr.records:
        C += 1.0 / r.t**2
        assert r.F_t <= r.t * r.v_t + C + 1e-9 * r.t * (1 + abs(r.v_t))


def test_jump_count_bound_on_recorded_adversary():
    T = 64
    adv = adversary_sharp(1.0, 2.0, 1.1, 1.0, 0.25, T)
    _, recorded = record_oblivious(adv, make_policy("frugal"))
    tr = run(make_policy("frugal"), recorded)
    G = recorded.objective.regularity.lipschitz_G
    alpha = recorded.objective.regularity.sharpness_alpha
    bound = math.ceil(G / alpha) + 1 + math.log(T) / math.log(1 + alpha / G)
    assert len(tr.jump_times) <= bound


def test_greedy_regret_never_above_other_policies():
    inst = gen_sc_lower_bound(60, 1.0, 4.0)
    greedy = run(make_policy("greedy"), inst).final().regret_cum
    for other in ("frugal", "gap_frugal"):
        assert greedy <= run(make_policy(other), inst).final().regret_cum + 1e-8
    assert greedy <= run(make_policy("lsp", eps=0.05), inst).final().regret_cum + 1e-8


def test_injected_fault_breaks_regret_invariant():
    # disabling the jump branch must surface as positive running regret
    from cones.algorithms import Frugal, StepOutcome

    class LazyOnly(Frugal):
        def step(self, t, f, S):
            xhat = S.project(self.x_prev)
            from cones.solvers import minimize_over

            v = minimize_over(f, S).value
            self.F += f.eval(xhat)
            self.x_prev = xhat
            return StepOutcome(xhat, "lazy", {"v_t": v, "f_x": f.eval(xhat)})

    inst = gen_frozen(7, 200, 1.0, 4.0)
    broken = LazyOnly()
    tr = run(broken, inst)
    assert max(r.regret_cum for r in tr.records) > 1e-6


def test_unknown_policy_rejected():
    with pytest.raises(ParameterError):
        make_policy("does_not_exist")
