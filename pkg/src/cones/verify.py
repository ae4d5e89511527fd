"""Invariant suites runnable from the CLI (`verify <suite>`) and from tests.

Each check returns (name, passed, detail). Suites are deliberately cheap
enough to run together in well under two minutes.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .algorithms import make_policy
from .geometry import Ball, Box, ConvexSet, Cut, Halfspace, assert_nested, feasible_mask, intersect_halfspace
from .errors import EmptyIntersection
from .harness import run, record_oblivious
from .instances import (
    adversary_sc,
    adversary_sharp,
    cones_from_random_1d,
    gen_convex_lower_bound,
    gen_directional,
    gen_frozen,
    gen_random_1d_lin,
    gen_sc_lower_bound,
)
from .objectives import AbsShift, LinearPlusQuad, MaxAbs, Objective, Quadratic, ScaledNorm, SquaredNorm
from .oracle import brute_force_min_grid, offline_lin_dp_1d
from .solvers import minimize_over, nearest_minimizer, project_sublevel

Check = tuple[str, bool, str]


def _random_planar_set(rng: np.random.Generator) -> ConvexSet:
    lo = rng.uniform(-3, 0, size=2)
    hi = lo + rng.uniform(1, 4, size=2)
    S: ConvexSet = Box(lo, hi)
    center = (lo + hi) / 2
    for _ in range(rng.integers(0, 4)):
        normal = rng.normal(size=2)
        if np.linalg.norm(normal) < 1e-6:
            continue
        point = center + rng.uniform(-0.4, 0.4, size=2) * (hi - lo)
        try:
            S = intersect_halfspace(S, Halfspace(normal, float(normal @ point)))
        except EmptyIntersection:
            continue
    return S


def _random_objective(rng: np.random.Generator) -> Objective:
    kinds = [
        lambda: Quadratic(rng.uniform(-2, 2, size=2)),
        lambda: SquaredNorm(2),
        lambda: ScaledNorm(float(rng.uniform(0.5, 2.0)), rng.uniform(-2, 2, size=2)),
        lambda: MaxAbs(2),
        lambda: LinearPlusQuad(float(rng.uniform(0.01, 1.0))),
    ]
    return kinds[int(rng.integers(0, len(kinds)))]()


def geometry_checks(seed: int = 7) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    worst_nonexp = worst_idem = worst_member = 0.0
    cut_monotone = True
    for _ in range(60):
        S = _random_planar_set(rng)
        x = rng.uniform(-6, 6, size=2)
        p = S.project(x)
        y = S.sample(rng)
        worst_nonexp = max(
            worst_nonexp, np.linalg.norm(p - y) - np.linalg.norm(x - y)
        )
        worst_idem = max(worst_idem, float(np.linalg.norm(S.project(p) - p)))
        if not S.contains(p, 1e-8):
            worst_member = max(worst_member, 1.0)
        normal = rng.normal(size=2)
        if np.linalg.norm(normal) > 1e-6:
            try:
                S2 = intersect_halfspace(S, Halfspace(normal, float(normal @ p) - 0.1))
                q = S2.sample(rng)
                if not S.contains(q, S.feas_tol()):
                    cut_monotone = False
            except EmptyIntersection:
                pass
    out.append(("projection non-expansive", worst_nonexp <= 1e-8, f"worst excess {worst_nonexp:.2e}"))
    out.append(("projection idempotent", worst_idem <= 1e-8, f"worst drift {worst_idem:.2e}"))
    out.append(("projection member", worst_member == 0.0, "membership within 1e-8"))
    out.append(("cut monotone", cut_monotone, "points of refined sets stay feasible"))

    # brute-force agreement of projection on a grid
    ok = True
    detail = ""
    for _ in range(10):
        S = _random_planar_set(rng)
        x = rng.uniform(-6, 6, size=2)
        p = S.project(x)
        lo, hi = S.bounding_box()
        n = 400
        cell = float(np.max((hi - lo) / (n - 1)))
        axes = [np.linspace(lo[i], hi[i], n) for i in range(2)]
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        feas = feasible_mask(S, pts, S.feas_tol())
        if not feas.any():
            continue
        cand = pts[feas]
        dists = np.linalg.norm(cand - x, axis=1)
        best = cand[np.argmin(dists)]
        close = np.linalg.norm(best - p) <= 2.0 * cell * math.sqrt(2)
        certified = np.linalg.norm(p - x) <= dists.min() + 1e-9
        if not (close or certified):
            ok = False
            detail = f"grid argmin {best} vs projection {p}"
            break
    out.append(("projection matches 400x400 grid", ok, detail or "within 2 cells"))
    return out


def solver_checks(seed: int = 11) -> list[Check]:
    rng = np.random.default_rng(seed)
    out: list[Check] = []
    # minimum value vs brute-force grid on random planar instances
    worst = 0.0
    for _ in range(50):
        S = _random_planar_set(rng)
        f = _random_objective(rng)
        res = minimize_over(f, S)
        grid = brute_force_min_grid(f, S, 201)
        lo, hi = S.bounding_box()
        cell = float(np.max((hi - lo) / 200))
        Gf = f.regularity.lipschitz_G or 10.0
        worst = max(worst, res.value - grid.value - 1e-9)  # solver never above grid
        if grid.value - res.value > 2.5 * cell * math.sqrt(2) * Gf + 1e-6:
            worst = max(worst, grid.value - res.value)
    out.append(("minimize_over vs grid", worst <= 1e-9, f"worst mismatch {worst:.2e}"))

    # monotone minimum along a nested sequence
    inst = gen_sc_lower_bound(60, 1.0, 4.0)
    vals = [minimize_over(inst.objective, S).value for S in inst.sets]
    mono = all(b >= a - 1e-8 for a, b in zip(vals, vals[1:]))
    out.append(("nested minima nondecreasing", mono, "within 1e-8"))

    # near-minimizer containment and sublevel projection contracts
    ok_near = ok_sub = True
    for _ in range(30):
        S = _random_planar_set(rng)
        f = _random_objective(rng)
        res = minimize_over(f, S)
        delta = 1e-8 * (1 + abs(res.value))
        x = nearest_minimizer(f, S, rng.uniform(-4, 4, size=2), delta)
        if f.eval(x) > res.value + delta + 1e-7 or not S.contains(x, 1e-7):
            ok_near = False
        level = res.value + abs(rng.normal()) + 0.05
        p = project_sublevel(f, S, level, rng.uniform(-4, 4, size=2))
        if f.eval(p) > level + 1e-6 * (1 + abs(level)) or not S.contains(p, 1e-7):
            ok_sub = False
    out.append(("near-minimizer in delta set", ok_near, "value within min + delta"))
    out.append(("sublevel projection feasible", ok_sub, "f <= level and in S"))
    return out


def algorithm_checks(seed: int = 13) -> list[Check]:
    out: list[Check] = []
    inst = gen_sc_lower_bound(80, 1.0, 4.0)
    frugal = run(make_policy("frugal"), inst)
    out.append(
        (
            "frugal nonpositive running regret",
            max(r.regret_cum for r in frugal.records) <= 1e-6,
            f"max {max(r.regret_cum for r in frugal.records):.2e}",
        )
    )
    gap = run(make_policy("gap_frugal"), gen_directional(100.0, 90))
    ok = all(
        r.F_t <= r.t * r.v_t + sum(1.0 / u**2 for u in range(1, r.t + 1)) + 1e-6
        for r in gap.records
    )
    out.append(("gap-frugal budget invariant", ok, "F_t <= t v_t + C_t"))

    eps = 0.1
    lsp = run(make_policy("lsp", eps=eps), inst)
    # level bound: per-step loss never exceeds the running feasible minimum
    # plus eps (the level lags the minimum from below)
    ok = all(r.f_x <= r.v_t + eps + 1e-7 for r in lsp.records)
    out.append(("lsp per-step level bound", ok, "f(x_t) <= v_t + eps"))

    greedy = run(make_policy("greedy"), inst)
    others = [frugal, lsp]
    ok = all(greedy.final().regret_cum <= o.final().regret_cum + 1e-8 for o in others)
    out.append(("greedy minimal regret", ok, "greedy <= frugal, lsp"))

    feas = all(
        tr.records and all(np.isfinite(r.f_x) for r in tr.records)
        for tr in (frugal, gap, lsp, greedy)
    )
    out.append(("all actions feasible", feas, "run() enforces membership"))

    # jump-count bound on a recorded sharp-adversary input
    T = 64
    adv = adversary_sharp(1.0, 2.0, 1.1, 1.0, 0.25, T)
    _, rec = record_oblivious(adv, make_policy("frugal"))
    rerun = run(make_policy("frugal"), rec)
    G = rec.objective.regularity.lipschitz_G
    alpha = rec.objective.regularity.sharpness_alpha
    bound = math.ceil(G / alpha) + 1 + math.log(T) / math.log(1 + alpha / G)
    out.append(
        (
            "frugal jump count bounded",
            len(rerun.jump_times) <= bound,
            f"{len(rerun.jump_times)} <= {bound:.1f}",
        )
    )

    # 1-d chasing: action reachable within its own service cost
    inst1 = gen_random_1d_lin(40, seed)
    ab = run(make_policy("ab"), inst1)
    ok = True
    x_prev = inst1.x0
    for t, r in enumerate(ab.records, start=1):
        S = inst1.sets[t - 1]
        z = S.project(x_prev)
        if abs(float(r.x[0] - z[0])) > inst1.per_step[t - 1].eval(r.x) + 1e-9:
            ok = False
        x_prev = r.x
    out.append(("ab action within service budget", ok, "|x - z| <= f(x)"))
    return out


def instance_checks(seed: int = 17) -> list[Check]:
    out: list[Check] = []
    gens = {
        "sc_lb": gen_sc_lower_bound(40, 1.0, 4.0),
        "convex_lb": gen_convex_lower_bound(40, 4.0),
        "directional": gen_directional(50.0, 40),
        "frozen": gen_frozen(7, 40, 1.0, 4.0),
        "random_1d": gen_random_1d_lin(40, seed),
    }
    for name, inst in gens.items():
        rep = assert_nested(inst.sets, samples=20, seed=seed)
        out.append((f"{name} nested", rep.ok, f"{len(rep.violations)} violations"))

    inst = gen_sc_lower_bound(40, 1.0, 4.0)
    k = inst.meta["k"]
    mins = [np.array(m) for m in inst.meta["minimizers"]]
    radii = [abs(m[1]) for m in mins if m[0] == 0.0]
    ok = all(
        abs(r1 - (r0 + k * k / r0)) <= 1e-9 * (1 + r1)
        for r0, r1 in zip(radii, radii[1:])
    )
    out.append(("radius recurrence", ok, "r_{i+1} = r_i + k^2/r_i"))

    cinst = gen_convex_lower_bound(64, 4.0)
    inside = all(cinst.domain.contains(np.array(m), 1e-9) for m in cinst.meta["minimizers"])
    out.append(("oscillation stays inside domain", inside, "geometric drop bounded"))

    adv = adversary_sc(1.0, 2.0, 1.1, 0.25, T=256)
    tr = run(make_policy("frugal"), adv)
    rep = tr.adversary_report
    out.append(
        (
            "adversary periods complete",
            rep["periods_completed"] >= 1,
            f"{rep['periods_completed']} of {rep['periods_constructed']}",
        )
    )
    return out


def oracle_checks(seed: int = 19) -> list[Check]:
    out: list[Check] = []
    # DP vs exhaustive enumeration on tiny instances
    ok = True
    detail = ""
    for s in range(5):
        inst = gen_random_1d_lin(4, 100 + s)
        res = offline_lin_dp_1d(inst, 21)
        lo, hi = inst.domain.bounding_box()
        grid = np.linspace(float(lo[0]), float(hi[0]), 21)
        tols = [S.feas_tol() for S in inst.sets]
        feas = [
            [g for g in grid if inst.sets[t].contains(np.array([g]), tols[t])]
            for t in range(4)
        ]
        best = np.inf
        import itertools

        for path in itertools.product(*feas):
            c = abs(path[0] - float(inst.x0[0]))
            for t in range(4):
                c += inst.per_step[t].eval(np.array([path[t]]))
                if t:
                    c += abs(path[t] - path[t - 1])
            best = min(best, c)
        if abs(best - res.value) > 1e-9 * (1 + abs(best)):
            ok = False
            detail = f"seed {100 + s}: enum {best} vs dp {res.value}"
            break
    out.append(("dp equals exhaustive enumeration", ok, detail or "T=4, 21-point grid"))

    inst = gen_random_1d_lin(30, seed)
    v1 = offline_lin_dp_1d(inst, 1001).value
    v2 = offline_lin_dp_1d(inst, 2001).value
    out.append(
        (
            "dp refinement stable",
            abs(v1 - v2) <= 1e-3 * (1 + abs(v2)),
            f"{v1:.6f} vs {v2:.6f}",
        )
    )

    cinst = gen_sc_lower_bound(20, 1.0, 4.0)
    from .oracle import static_opt

    res = static_opt(cinst.objective, cinst.sets[-1], cinst.T, cinst.x0)
    ok = all(S.contains(res.path[0], S.feas_tol()) for S in cinst.sets)
    out.append(("static optimum feasible everywhere", ok, "by nestedness"))
    return out


def determinism_checks() -> list[Check]:
    inst1 = gen_random_1d_lin(30, 42)
    inst2 = gen_random_1d_lin(30, 42)
    same_inst = all(
        a.per_step[t].to_json() == b.per_step[t].to_json()
        for a, b in [(inst1, inst2)]
        for t in range(30)
    )
    tr1 = run(make_policy("frugal"), gen_frozen(7, 120, 1.0, 4.0))
    tr2 = run(make_policy("frugal"), gen_frozen(7, 120, 1.0, 4.0))
    same_trace = all(
        np.array_equal(a.x, b.x) and a.kind == b.kind
        for a, b in zip(tr1.records, tr2.records)
    )
    return [
        ("seeded corpus bit-identical", same_inst, "same seed, same losses"),
        ("traces deterministic", same_trace, "identical reruns"),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "geometry": geometry_checks,
    "solvers": solver_checks,
    "algorithms": algorithm_checks,
    "instances": instance_checks,
    "oracle": oracle_checks,
    "determinism": determinism_checks,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        checks: list[Check] = []
        for suite in SUITES.values():
            checks.extend(suite())
        return checks
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name]()
