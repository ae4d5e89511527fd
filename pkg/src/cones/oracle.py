"""Ground-truth references: static hindsight benchmark, an offline DP optimum
for 1-d service-plus-movement costs, and brute-force grid minimizers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptySet, InfeasibleGrid
from .geometry import ConvexSet, as_point, feasible_mask
from .instances import Instance
from .objectives import Objective
from .solvers import minimize_over


@dataclass
class OfflineResult:
    value: float
    path: list[np.ndarray]
    grid_resolution: int = 0
    move_from_start: float = 0.0


def static_opt(f: Objective, S_T: ConvexSet, T: int, x0) -> OfflineResult:
    """Best fixed feasible action in hindsight: T times the final minimum."""
    x0 = as_point(x0)
    res = minimize_over(f, S_T)
    return OfflineResult(
        value=T * res.value,
        path=[res.argmin],
        move_from_start=float(np.linalg.norm(res.argmin - x0)),
    )


def _eval_on_grid(f: Objective, grid: np.ndarray) -> np.ndarray:
    from .objectives import AbsShift, ScaledNorm

    if isinstance(f, AbsShift):
        return np.abs(grid - f.shift) + f.value_shift
    if isinstance(f, ScaledNorm) and f.center.size == 1:
        return f.scale * np.abs(grid - float(f.center[0])) + f.value_shift
    return np.array([f.eval(np.array([g])) for g in grid])


def _feasible_on_grid(S: ConvexSet, grid: np.ndarray) -> np.ndarray:
    from .solvers import _as_interval

    iv = _as_interval(S)
    if iv is not None:
        tol = S.feas_tol()
        return (grid >= iv[0] - tol) & (grid <= iv[1] + tol)
    tol = S.feas_tol()
    return np.array([S.contains(np.array([g]), tol) for g in grid])


def _running_min(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix minima of a with first-achiever argmin indices."""
    m = np.minimum.accumulate(a)
    prev = np.concatenate(([np.inf], m[:-1]))
    idx = np.arange(a.size)
    achieved = a < prev
    arg = np.maximum.accumulate(np.where(achieved, idx, -1))
    return m, arg


def offline_lin_dp_1d(instance: Instance, grid_n: int = 2001) -> OfflineResult:
    """Offline optimum of sum f_t(x_t) + sum |x_t - x_{t-1}| over a uniform
    grid of the admissible interval, with x_t restricted to S_t.

    The inner min over the previous position uses the two-pass distance
    transform, so the whole table costs O(T * grid_n). Ties break toward the
    left pass (smaller grid index preferred).
    """
    if grid_n < 3:
        raise InfeasibleGrid("grid_n must be at least 3")
    lo, hi = instance.domain.bounding_box()
    lo, hi = float(lo[0]), float(hi[0])
    grid = np.linspace(lo, hi, grid_n)
    h = float(grid[1] - grid[0])
    T = instance.T
    x0 = float(instance.x0[0])
    steps = h * np.arange(grid_n)

    feasible = np.empty((T, grid_n), dtype=bool)
    fvals = np.empty((T, grid_n))
    for t in range(1, T + 1):
        feas = _feasible_on_grid(instance.sets[t - 1], grid)
        if not feas.any():
            raise InfeasibleGrid(f"no grid point inside the step-{t} set")
        feasible[t - 1] = feas
        fvals[t - 1] = _eval_on_grid(instance.objective_at(t), grid)

    V = np.where(feasible[0], fvals[0] + np.abs(grid - x0), np.inf)
    parents = np.zeros((T, grid_n), dtype=np.int64)
    parents[0] = -1
    for t in range(2, T + 1):
        lm, larg = _running_min(V - steps)
        left = lm + steps
        rm_rev, rarg_rev = _running_min((V + steps)[::-1])
        right = rm_rev[::-1] - steps
        right_arg = np.where(rarg_rev[::-1] >= 0, grid_n - 1 - rarg_rev[::-1], -1)
        take_left = left <= right
        move = np.where(take_left, left, right)
        arg = np.where(take_left, larg, right_arg)
        V = np.where(feasible[t - 1], fvals[t - 1] + move, np.inf)
        parents[t - 1] = arg
    i = int(np.argmin(V))
    value = float(V[i])
    if not np.isfinite(value):
        raise InfeasibleGrid("dynamic program found no feasible path")
    idx_path = [i]
    for t in range(T - 1, 0, -1):
        i = int(parents[t][i])
        idx_path.append(i)
    idx_path.reverse()
    path = [np.array([grid[j]]) for j in idx_path]
    return OfflineResult(value=value, path=path, grid_resolution=grid_n)


def lin_opt_stable(instance: Instance, grid_n: int = 2001, rel_tol: float = 0.01) -> OfflineResult:
    """DP optimum with a refinement-stability check at roughly half the
    resolution; raises if the two disagree by more than rel_tol."""
    coarse = offline_lin_dp_1d(instance, grid_n // 2 + 1)
    fine = offline_lin_dp_1d(instance, grid_n)
    if abs(coarse.value - fine.value) > rel_tol * (1.0 + abs(fine.value)):
        raise InfeasibleGrid(
            f"DP value not refinement-stable: {coarse.value} vs {fine.value}"
        )
    return fine


def brute_force_min_grid(f: Objective, S: ConvexSet, n: int = 101) -> OfflineResult:
    """Minimum of f over an n-per-axis grid of S's bounding box (d <= 2)."""
    lo, hi = S.bounding_box()
    d = lo.size
    if d > 2:
        raise InfeasibleGrid("grid oracle supports d <= 2 only")
    tol = S.feas_tol()
    axes = [np.linspace(lo[i], hi[i], n) for i in range(d)]
    if d == 1:
        pts = axes[0][:, None]
    else:
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    feas = feasible_mask(S, pts, tol)
    if not feas.any():
        raise InfeasibleGrid("no grid point inside the set")
    cand = pts[feas]
    vals = np.array([f.eval(p) for p in cand])
    i = int(np.argmin(vals))
    return OfflineResult(value=float(vals[i]), path=[cand[i]], grid_resolution=n)
