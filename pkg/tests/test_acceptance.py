"""Acceptance gate: one test per primary criterion, each printing a PASS line
with the measured quantity and its pinned tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report lines.
"""

import math
import time

import numpy as np
import pytest

from cones.algorithms import lin_cost, make_policy
from cones.harness import fit_loglog_slope, record_oblivious, run, sweep_T
from cones.instances import (
    adversary_sc,
    adversary_sharp,
    cones_from_random_1d,
    gen_directional,
    gen_frozen,
    gen_random_1d_lin,
    gen_sc_lower_bound,
    make_instance,
)
from cones.oracle import lin_opt_stable
from cones.verify import run_suite

SQRT2 = math.sqrt(2.0)


def _report(name: str, ok: bool, detail: str, elapsed: float):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.1f}s)")
    assert ok, f"{name}: {detail}"


def test_frugal_nonpositive_regret_all_families():
    t0 = time.time()
    worst = -np.inf
    families = [
        make_instance("sc_lb", 128, {"r0": 1.0, "D": 4.0}),
        make_instance("convex_lb", 64, {"D": 4.0, "a": 4.0 / (2 * SQRT2), "k": 4.0 / (4 * SQRT2)}),
        make_instance("directional", 200, {"D": 210.0}),
        make_instance("frozen", 200, {"T_freeze": 7, "r0": 1.0, "D": 4.0}),
        make_instance("sharp_adv", 256, {}),
        make_instance("sc_adv", 256, {}),
    ]
    families += [cones_from_random_1d(gen_random_1d_lin(50, seed)) for seed in range(20)]
    for inst in families:
        tr = run(make_policy("frugal"), inst)
        worst = max(worst, max(r.regret_cum for r in tr.records))
    elapsed = time.time() - t0
    _report(
        "frugal nonpositive regret (all families)",
        worst <= 1e-6 and elapsed < 30,
        f"worst running regret {worst:.3e} <= 1e-6",
        elapsed,
    )


def test_frozen_jump_reproduction():
    t0 = time.time()
    inst = gen_frozen(7, 200, 1.0, 4.0)
    tr = run(make_policy("frugal"), inst)
    jumps = tr.jump_times
    ok = len(jumps) == 1 and 165 <= jumps[0] <= 167
    after = [r.regret_cum for r in tr.records if jumps and r.t >= jumps[0]]
    ok = ok and max(after) <= 1e-6
    elapsed = time.time() - t0
    _report(
        "single late jump on the frozen family",
        ok and elapsed < 5,
        f"jumps={jumps}, post-jump regret max {max(after):.2e}",
        elapsed,
    )


@pytest.fixture(scope="module")
def sc_lb_sweeps():
    Ts = [16, 32, 64, 128, 256]
    params = {"r0": 1.0, "D": 4.0}
    greedy = sweep_T(lambda T: make_policy("greedy"), "sc_lb", Ts, params)
    frugal = sweep_T(lambda T: make_policy("frugal"), "sc_lb", Ts, params)
    return greedy, frugal


def test_greedy_sqrt_movement_growth(sc_lb_sweeps):
    t0 = time.time()
    greedy, _ = sc_lb_sweeps
    slope = fit_loglog_slope(greedy, "move_final")
    elapsed = time.time() - t0
    _report(
        "greedy sqrt-movement growth",
        0.35 <= slope <= 0.65 and elapsed < 60,
        f"log-log slope {slope:.3f} in [0.35, 0.65]",
        elapsed,
    )


def test_frugal_sublinear_movement(sc_lb_sweeps):
    t0 = time.time()
    greedy, frugal = sc_lb_sweeps
    dominated = all(f.move_final <= g.move_final for f, g in zip(frugal, greedy))
    slope = fit_loglog_slope(frugal, "move_final")
    elapsed = time.time() - t0
    _report(
        "frugal sublinear movement",
        dominated and slope <= 0.35 and elapsed < 60,
        f"dominated={dominated}, slope {slope:.3f} <= 0.35",
        elapsed,
    )


def test_greedy_linear_movement_flat_loss():
    t0 = time.time()
    D = 4.0
    params = {"D": D, "a": D / (2 * SQRT2), "k": D / (4 * SQRT2)}
    rows = sweep_T(lambda T: make_policy("greedy"), "convex_lb", [16, 32, 64, 128, 256], params)
    ok = all(r.move_final >= 0.9 * (D / SQRT2) * (r.T - 1) for r in rows)
    elapsed = time.time() - t0
    worst = min(r.move_final / ((D / SQRT2) * (r.T - 1)) for r in rows)
    _report(
        "greedy linear movement on the flat-loss family",
        ok and elapsed < 30,
        f"min ratio to (D/sqrt2)(T-1) = {worst:.3f} >= 0.9",
        elapsed,
    )


def test_lsp_tradeoff():
    t0 = time.time()
    T = 200
    inst = gen_sc_lower_bound(T, 1.0, 4.0)
    G = inst.objective.regularity.lipschitz_G
    D = inst.domain.diameter_bound()
    details = []
    ok = True
    for eps in (1.0 / T, T**-0.5):
        tr = run(make_policy("lsp", eps=eps), inst)
        regret = tr.final().regret_cum
        phases = max(r.phase for r in tr.records)
        ok = ok and regret <= T * eps + 1e-4 and phases <= G * D / eps + 1
        details.append(f"eps={eps:.4g}: regret {regret:.4f} <= {T * eps:.4f}, phases {phases}")
    elapsed = time.time() - t0
    _report("lsp regret/phase tradeoff", ok and elapsed < 30, "; ".join(details), elapsed)


def test_gap_frugal_directional_regret():
    t0 = time.time()
    inst = gen_directional(210.0, 200)
    tr = run(make_policy("gap_frugal"), inst)
    cap = sum(1.0 / t**2 for t in range(1, 201))
    assert cap < 1.645
    final = tr.final().regret_cum
    C = 0.0
    invariant = True
    for r in tr.records:
        C += 1.0 / r.t**2
        if r.F_t > r.t * r.v_t + C + 1e-9 * r.t * (1 + abs(r.v_t)):
            invariant = False
    elapsed = time.time() - t0
    _report(
        "gap-frugal on directional input",
        final <= cap + 1e-4 and invariant and elapsed < 30,
        f"final regret {final:.4f} <= {cap:.4f}, budget invariant {invariant}",
        elapsed,
    )


def test_jump_count_bound_recorded_adversary():
    t0 = time.time()
    ok = True
    details = []
    for T in (64, 256):
        adv = adversary_sharp(1.0, 2.0, 1.1, 1.0, 0.25, T)
        _, recorded = record_oblivious(adv, make_policy("frugal"))
        tr = run(make_policy("frugal"), recorded)
        G = recorded.objective.regularity.lipschitz_G
        alpha = recorded.objective.regularity.sharpness_alpha
        bound = math.ceil(G / alpha) + 1 + math.log(T) / math.log(1 + alpha / G)
        ok = ok and len(tr.jump_times) <= bound
        details.append(f"T={T}: {len(tr.jump_times)} <= {bound:.1f}")
    elapsed = time.time() - t0
    _report("frugal jump-count bound", ok and elapsed < 30, "; ".join(details), elapsed)


def test_adaptive_adversaries_log_periods():
    t0 = time.time()
    ok = True
    details = []
    for maker, label in ((adversary_sharp, "sharp"), (None, "sc")):
        for T in (128, 512, 2048):
            inst = (
                adversary_sharp(1.0, 2.0, 1.1, 1.0, 0.25, T)
                if label == "sharp"
                else adversary_sc(1.0, 2.0, 1.1, 0.25, 1.0, 0.0, T)
            )
            tr = run(make_policy("frugal"), inst)
            rep = tr.adversary_report
            completed = rep["periods_completed"]
            need = math.floor(math.log(T) / math.log(1 + inst.meta["cbar"])) * 0.5
            move_need = (completed - 1) * inst.meta["min_period_move"]
            got = tr.final().move_cum
            ok = ok and completed >= need and got >= move_need - 1e-9
            details.append(f"{label} T={T}: {completed} periods (>= {need}), move {got:.2f}")
    elapsed = time.time() - t0
    _report(
        "adaptive adversaries: period growth and movement",
        ok and elapsed < 120,
        "; ".join(details),
        elapsed,
    )


def test_chasing_five_competitive():
    t0 = time.time()
    worst = 0.0
    for seed in range(50):
        inst = gen_random_1d_lin(50, seed)
        tr = run(make_policy("ab"), inst)
        opt = lin_opt_stable(inst, 2001)
        worst = max(worst, lin_cost(tr) / opt.value)
    elapsed = time.time() - t0
    _report(
        "1-d chasing 5-competitive",
        worst <= 5.05 and elapsed < 120,
        f"worst ratio {worst:.4f} <= 5.05 over 50 seeds",
        elapsed,
    )


def test_sharp_greedy_twelve_competitive():
    t0 = time.time()
    worst = 0.0
    for seed in range(50):
        inst = gen_random_1d_lin(50, seed, sharp_alpha=1.0)
        tr = run(make_policy("greedy"), inst)
        opt = lin_opt_stable(inst, 2001)
        worst = max(worst, lin_cost(tr) / opt.value)
    elapsed = time.time() - t0
    _report(
        "sharp greedy 12/alpha-competitive",
        worst <= 12.12 and elapsed < 120,
        f"worst ratio {worst:.4f} <= 12.12 over 50 seeds",
        elapsed,
    )


def test_property_suites_all_pass():
    t0 = time.time()
    checks = run_suite("all")
    failed = [name for name, ok, _ in checks if not ok]
    elapsed = time.time() - t0
    _report(
        "verify-all property suites",
        not failed and elapsed < 120,
        f"{len(checks)} checks, failures: {failed or 'none'}",
        elapsed,
    )
