"""Online policies sharing a single step interface.

Each policy is constructed fresh per run, receives (t, objective, feasible
set) once per round, and returns a StepOutcome. Comparisons against the
running budget carry a small time-scaled slack so accumulated rounding can
never flip a macroscopically decided branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BisectionFailure, ParameterError
from .geometry import ConvexSet, as_point
from .objectives import Objective
from .solvers import _as_interval, _ternary_min, minimize_over, nearest_minimizer, project_sublevel

LAZY = "lazy"
JUMP = "jump"
PHASE_TRANSITION = "phase_transition"
GREEDY = "greedy"
AB_MOVE = "ab_move"


def cond_slack(t: int, v: float) -> float:
    """Slack applied to lazy/jump threshold comparisons at time t."""
    return 1e-9 * t * (1.0 + abs(v))


def near_delta(v: float) -> float:
    """Width of the near-minimizer surrogate set."""
    return 1e-8 * (1.0 + abs(v))


@dataclass
class StepOutcome:
    action: np.ndarray
    kind: str
    diagnostics: dict = field(default_factory=dict)


class Policy:
    """Stateful online decision rule."""

    name = "abstract"

    def start(self, x0) -> None:
        self.x_prev = as_point(x0)
        self.t = 0
        self.jump_times: list[int] = []

    def step(self, t: int, f: Objective, S: ConvexSet) -> StepOutcome:
        raise NotImplementedError


class Greedy(Policy):
    """Always move to the feasible minimizer nearest the previous action."""

    name = "greedy"

    def step(self, t, f, S):
        res = minimize_over(f, S)
        x = nearest_minimizer(f, S, self.x_prev, near_delta(res.value))
        self.x_prev = x
        return StepOutcome(x, GREEDY, {"v_t": res.value, "f_x": f.eval(x)})


class Frugal(Policy):
    """Lazy projection while the cumulative budget allows it, else a jump to
    the nearest minimizer. Keeps cumulative loss at most t * (current min)."""

    name = "frugal"

    def start(self, x0):
        super().start(x0)
        self.F = 0.0

    def step(self, t, f, S):
        xhat = S.project(self.x_prev)
        res = minimize_over(f, S)
        v = res.value
        f_hat = f.eval(xhat)
        slack = self.F + f_hat - t * v
        if slack <= cond_slack(t, v):
            x, kind = xhat, LAZY
        else:
            x = nearest_minimizer(f, S, self.x_prev, near_delta(v))
            kind = JUMP
            self.jump_times.append(t)
        self.F += f.eval(x)
        self.x_prev = x
        return StepOutcome(
            x,
            kind,
            {
                "v_t": v,
                "f_x": f.eval(x),
                "budget_slack": -slack,
                "phase": len(self.jump_times),
            },
        )


class Lsp(Policy):
    """Track a slowly rising loss level; project onto its sublevel set and
    raise the level only when the feasible minimum exceeds it."""

    name = "lsp"

    def __init__(self, eps: float):
        if eps <= 0:
            raise ParameterError("lsp tolerance must be positive")
        self.eps = float(eps)

    def start(self, x0):
        super().start(x0)
        self.phase = 0
        self.level = None

    def step(self, t, f, S):
        res = minimize_over(f, S)
        v = res.value
        kind = LAZY
        if self.level is None:
            self.phase, self.level = 1, v
        elif v > self.level + self.eps + 1e-9 * (1.0 + abs(v)):
            self.phase += 1
            self.level = v
            kind = PHASE_TRANSITION
        # v can exceed the target level by the comparison slack; widen so the
        # sublevel set is never empty
        target = max(self.level + self.eps, v)
        x = project_sublevel(f, S, target, self.x_prev, _known_min=v)
        self.x_prev = x
        return StepOutcome(
            x,
            kind,
            {"v_t": v, "f_x": f.eval(x), "level": self.level, "phase": self.phase},
        )


class GapFrugal(Policy):
    """Budget-gated lazy projection with an extra per-step gap exemption and a
    slowly growing cumulative allowance sum(1/t^2)."""

    name = "gap_frugal"

    def start(self, x0):
        super().start(x0)
        self.F = 0.0
        self.C = 0.0

    def step(self, t, f, S):
        eps_t = 1.0 / (t * t)
        self.C += eps_t
        xhat = S.project(self.x_prev)
        res = minimize_over(f, S)
        v = res.value
        f_hat = f.eval(xhat)
        slack = cond_slack(t, v)
        budget_ok = self.F + f_hat <= t * v + self.C + slack
        gap_ok = f_hat - v <= eps_t + slack
        if budget_ok or gap_ok:
            x, kind = xhat, LAZY
        else:
            x = nearest_minimizer(f, S, self.x_prev, near_delta(v))
            kind = JUMP
            self.jump_times.append(t)
        self.F += f.eval(x)
        self.x_prev = x
        return StepOutcome(
            x,
            kind,
            {
                "v_t": v,
                "f_x": f.eval(x),
                "C_t": self.C,
                "budget_ok": budget_ok,
                "gap_ok": gap_ok,
                "phase": len(self.jump_times),
            },
        )


class AbChase(Policy):
    """One-dimensional service-plus-movement rule: anchor at the projection,
    then take the best point reachable within its own service cost."""

    name = "ab"
    BISECT_ITERS = 128

    def step(self, t, f, S):
        iv = _as_interval(S)
        if iv is None:
            raise ParameterError("this policy requires one-dimensional intervals")
        lo, hi = iv
        z = min(max(float(self.x_prev[0]), lo), hi)
        fv = lambda s: f.eval(np.array([s]))
        L = self._component_edge(fv, z, lo, left=True)
        R = self._component_edge(fv, z, hi, left=False)
        xs, _ = _ternary_min(fv, L, R)
        xs = self._tie_break(fv, L, R, xs)
        x = np.array([xs])
        self.x_prev = x
        return StepOutcome(
            x, AB_MOVE, {"f_x": f.eval(x), "z_t": z, "comp_lo": L, "comp_hi": R}
        )

    def _component_edge(self, fv, z, end, left: bool) -> float:
        """Endpoint of the maximal interval around z where movement from z is
        covered by the service cost: first root of f(x) - |x - z|."""
        g = (lambda s: fv(s) - (z - s)) if left else (lambda s: fv(s) - (s - z))
        if g(z) < -1e-12 * (1.0 + abs(fv(z))):
            raise BisectionFailure("anchor violates its own service-cost bound")
        if g(end) >= 0.0:
            # g is convex; it may still dip below zero strictly inside
            xm, gm = _ternary_min(g, min(z, end), max(z, end))
            if gm >= 0.0:
                return end
            inner = xm
        else:
            inner = end
        a, b = z, inner
        for _ in range(self.BISECT_ITERS):
            m = 0.5 * (a + b)
            if g(m) >= 0.0:
                a = m
            else:
                b = m
        return a

    def _tie_break(self, fv, L, R, xs) -> float:
        """Move ties of the scalar minimizer toward the previous action."""
        vm = fv(xs)
        tol = 1e-12 * (1.0 + abs(vm))
        flat_lo, flat_hi = xs, xs
        a, b = L, xs
        for _ in range(80):
            m = 0.5 * (a + b)
            if fv(m) <= vm + tol:
                b = m
            else:
                a = m
        flat_lo = b
        a, b = xs, R
        for _ in range(80):
            m = 0.5 * (a + b)
            if fv(m) <= vm + tol:
                a = m
            else:
                b = m
        flat_hi = a
        prev = float(self.x_prev[0])
        return min(max(prev, flat_lo), flat_hi)


def lin_cost(trace, fs=None) -> float:
    """Total service-plus-movement cost of a completed trace."""
    total = 0.0
    for rec in trace.records:
        total += rec.f_x + rec.move_inc
    return total


_POLICIES = {
    "greedy": Greedy,
    "frugal": Frugal,
    "lsp": Lsp,
    "gap_frugal": GapFrugal,
    "ab": AbChase,
}


def make_policy(name: str, **params) -> Policy:
    if name not in _POLICIES:
        raise ParameterError(
            f"unknown policy {name!r}; choose from {sorted(_POLICIES)}"
        )
    return _POLICIES[name](**params)


def policy_names() -> list[str]:
    return sorted(_POLICIES)
