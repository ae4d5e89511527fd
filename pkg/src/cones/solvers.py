"""Constrained minimization oracles built on the geometry primitives.

Exact paths:
  * isotropic quadratics  -> projection of the unconstrained minimizer
  * diagonal quadratics   -> interval / polygon / active-set enumeration
  * scaled norms          -> projection of the center
  * max-of-coordinates    -> epigraph LP
  * 1-d piecewise-linear  -> closed form

Anything else (including user-supplied duck-typed objectives) runs through a
projected-subgradient fallback with best-iterate tracking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .errors import BisectionFailure, EmptyLevelSet, EmptySet, IterationLimit
from .geometry import Ball, Box, ConvexSet, Cut, Halfspace, as_point
from .objectives import (
    AbsShift,
    LinearPlusQuad,
    MaxAbs,
    Objective,
    Quadratic,
    ScaledNorm,
    SquaredNorm,
)

SUBGRAD_ITERS = 5_000
SUBLEVEL_BISECT_STEPS = 200


def opt_tol(value: float) -> float:
    """Optimality slack, relative to the optimal value."""
    return 1e-9 * (1.0 + abs(value))


@dataclass(frozen=True)
class MinResult:
    argmin: np.ndarray
    value: float
    certified: bool


# ---------------------------------------------------------------------------
# quadratic forms: f(x) = 0.5 x'diag(q)x + c'x + const


def _quad_form(f: Objective) -> Optional[tuple[np.ndarray, np.ndarray, float]]:
    if isinstance(f, Quadratic):
        d = f.center.size
        return np.ones(d), -f.center, 0.5 * float(f.center @ f.center) + f.value_shift
    if isinstance(f, SquaredNorm):
        return 2.0 * np.ones(f.dim), np.zeros(f.dim), f.value_shift
    if isinstance(f, LinearPlusQuad):
        return (
            np.array([2.0 * f.curvature, 0.0]),
            np.array([1.0, 1.0]),
            f.value_shift,
        )
    return None


def _quad_eval(q, c, const, x) -> float:
    return 0.5 * float(x @ (q * x)) + float(c @ x) + const


def _min_quad_interval(lo: float, hi: float, q: float, c: float) -> float:
    if q > 0.0:
        return min(max(-c / q, lo), hi)
    return lo if c >= 0 else hi


def _poly_contains(verts: np.ndarray, x: np.ndarray) -> bool:
    """Membership in a CCW convex polygon (conservative for degenerate cases)."""
    n = len(verts)
    if n < 3:
        return False
    eps = 1e-12 * (1.0 + float(np.abs(verts).max()))
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        e = b - a
        if e[0] * (x[1] - a[1]) - e[1] * (x[0] - a[0]) < -eps:
            return False
    return True


def _min_quad_polygon(verts: np.ndarray, q, c, const) -> tuple[np.ndarray, float]:
    cands = list(verts)
    n = len(verts)
    if np.all(q > 0):
        xu = -c / q
        if _poly_contains(verts, xu):
            cands.append(xu)
    if n >= 2:
        for i in range(n if n > 2 else 1):
            a = verts[i]
            b = verts[(i + 1) % n]
            d = b - a
            denom = float(d @ (q * d))
            if denom > 0:
                t = min(1.0, max(0.0, -float(d @ (q * a) + c @ d) / denom))
            else:
                t = 0.0 if float(c @ d) >= 0 else 1.0
            cands.append(a + t * d)
    best, best_v = None, np.inf
    for x in cands:
        v = _quad_eval(q, c, const, x)
        if v < best_v - 1e-15:
            best, best_v = np.asarray(x, dtype=float), v
    return best, best_v


def _min_quad_enum(halves: list[Halfspace], q, c, const, tol) -> tuple[np.ndarray, float]:
    import itertools

    d = q.size
    A = np.array([h.normal for h in halves])
    b = np.array([h.offset for h in halves])
    m = len(halves)
    best, best_v = None, np.inf
    for size in range(0, d + 1):
        for idx in itertools.combinations(range(m), size):
            Ai = A[list(idx)]
            k = len(idx)
            kkt = np.zeros((d + k, d + k))
            kkt[:d, :d] = np.diag(q)
            if k:
                kkt[:d, d:] = -Ai.T
                kkt[d:, :d] = Ai
            rhs = np.concatenate([-c, b[list(idx)]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x = sol[:d]
            if np.all(A @ x >= b - tol):
                v = _quad_eval(q, c, const, x)
                if v < best_v - 1e-15:
                    best, best_v = x, v
    if best is None:
        raise EmptySet("no feasible candidate in active-set enumeration")
    return best, best_v


def _minimize_quadratic(S: ConvexSet, q, c, const) -> tuple[np.ndarray, float, bool]:
    """Exact minimum of a diagonal quadratic where the geometry allows it."""
    d = q.size
    if isinstance(S, Box):
        x = np.array(
            [_min_quad_interval(S.lo[i], S.hi[i], q[i], c[i]) for i in range(d)]
        )
        return x, _quad_eval(q, c, const, x), True
    iso = np.all(q == q[0]) and q[0] > 0
    if iso:
        x = S.project(-c / q[0])
        certified = not (isinstance(S, Cut) and _needs_iterative(S))
        return x, _quad_eval(q, c, const, x), certified
    if isinstance(S, Cut) and isinstance(S.base, Box):
        if d == 1:
            iv = S._interval()
            if iv is None:
                raise EmptySet("minimization over an empty set")
            x = np.array([_min_quad_interval(iv[0], iv[1], q[0], c[0])])
            return x, _quad_eval(q, c, const, x), True
        if d == 2:
            poly = S._polygon()
            if poly is None:
                raise EmptySet("minimization over an empty set")
            x, v = _min_quad_polygon(poly, q, c, const)
            return x, v, True
        if d == 3:
            x, v = _min_quad_enum(S.halfspaces(), q, c, const, S.feas_tol())
            return x, v, True
    # anisotropic quadratic over ball-based geometry
    f = lambda x: _quad_eval(q, c, const, x)
    g = lambda x: q * x + c
    G = float(np.linalg.norm(c)) + float(np.max(q)) * S.diameter_bound() + 1.0
    x = _iterative_min(S, f, g, G)
    return x, f(x), False


def _needs_iterative(S: Cut) -> bool:
    return not isinstance(S.base, Box) or S.dim > 3


def _iterative_min(S: ConvexSet, fval: Callable, fsub: Callable, G: float) -> np.ndarray:
    """Projected subgradient with best-iterate tracking."""
    lo, hi = S.bounding_box()
    x = S.project((lo + hi) / 2.0)
    D = S.diameter_bound() + 1e-12
    best, best_v = x, fval(x)
    for k in range(1, SUBGRAD_ITERS + 1):
        g = fsub(x)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            return x
        x = S.project(x - (D / (G * np.sqrt(k))) * g)
        v = fval(x)
        if v < best_v:
            best, best_v = x, v
    return best


def _ternary_min(fval: Callable[[float], float], lo: float, hi: float, iters: int = 200):
    """Minimum of a convex scalar function on [lo, hi]."""
    a, b = lo, hi
    for _ in range(iters):
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if fval(m1) <= fval(m2):
            b = m2
        else:
            a = m1
    x = 0.5 * (a + b)
    return x, fval(x)


def _maxabs_lp(f: MaxAbs, S: ConvexSet) -> tuple[np.ndarray, float, bool]:
    d = f.dim
    if isinstance(S, Box):
        x = np.clip(np.zeros(d), S.lo, S.hi)
        return x, f.eval(x), True
    if isinstance(S, Cut) and isinstance(S.base, Box):
        halves = S.halfspaces()
        A_ub = []
        b_ub = []
        for i in range(d):
            row = np.zeros(d + 1)
            row[i], row[d] = 1.0, -1.0
            A_ub.append(row.copy())
            row[i] = -1.0
            A_ub.append(row)
            b_ub.extend([0.0, 0.0])
        for h in halves:
            A_ub.append(np.concatenate([-h.normal, [0.0]]))
            b_ub.append(-h.offset)
        res = linprog(
            np.eye(d + 1)[d],
            A_ub=np.array(A_ub),
            b_ub=np.array(b_ub),
            bounds=[(None, None)] * d + [(0, None)],
            method="highs",
        )
        if not res.success:
            raise EmptySet(f"LP for max-coordinate minimum failed: {res.message}")
        x = res.x[:d]
        return x, f.eval(x), True
    x = _iterative_min(S, f.eval, f.subgradient, 1.0)
    return x, f.eval(x), False


def minimize_over(f: Objective, S: ConvexSet) -> MinResult:
    """Minimum of f over S, with the minimizing point."""
    if S.is_empty():
        raise EmptySet("minimization over an empty set")
    qf = _quad_form(f)
    if qf is not None:
        x, v, cert = _minimize_quadratic(S, *qf)
        return MinResult(x, v, cert)
    if isinstance(f, ScaledNorm):
        x = S.project(f.center)
        cert = not (isinstance(S, Cut) and _needs_iterative(S))
        return MinResult(x, f.eval(x), cert)
    if isinstance(f, MaxAbs):
        x, v, cert = _maxabs_lp(f, S)
        return MinResult(x, v, cert)
    if isinstance(f, AbsShift):
        iv = _as_interval(S)
        if iv is not None:
            x = np.array([min(max(f.shift, iv[0]), iv[1])])
            return MinResult(x, f.eval(x), True)
    if S.dim == 1:
        iv = _as_interval(S)
        if iv is not None:
            xs, _ = _ternary_min(lambda s: f.eval(np.array([s])), iv[0], iv[1])
            x = np.array([xs])
            return MinResult(x, f.eval(x), False)
    G = getattr(getattr(f, "regularity", None), "lipschitz_G", None) or 1.0
    x = _iterative_min(S, f.eval, f.subgradient, G)
    return MinResult(x, f.eval(x), False)


def _as_interval(S: ConvexSet) -> Optional[tuple[float, float]]:
    if S.dim != 1:
        return None
    if isinstance(S, Box):
        return float(S.lo[0]), float(S.hi[0])
    if isinstance(S, Ball):
        return float(S.center[0]) - S.radius, float(S.center[0]) + S.radius
    if isinstance(S, Cut):
        iv = S._interval()
        if iv is None:
            raise EmptySet("empty interval")
        return iv
    return None


def nearest_minimizer(f: Objective, S: ConvexSet, ref, delta: float = 1e-8) -> np.ndarray:
    """Point of the near-minimizer surrogate {x in S : f(x) <= min + delta}
    closest to ref. Unique-minimizer losses return the minimizer directly."""
    ref = as_point(ref, dim=S.dim)
    if isinstance(f, (Quadratic, SquaredNorm, ScaledNorm, LinearPlusQuad, AbsShift)):
        return minimize_over(f, S).argmin
    res = minimize_over(f, S)
    return project_sublevel(f, S, res.value + delta, ref, _known_min=res.value)


def project_sublevel(
    f: Objective, S: ConvexSet, level: float, ref, _known_min: Optional[float] = None
) -> np.ndarray:
    """Euclidean projection of ref onto S intersected with {f <= level}."""
    ref = as_point(ref, dim=S.dim)
    v = _known_min if _known_min is not None else minimize_over(f, S).value
    tol = opt_tol(level)
    if v > level + tol:
        raise EmptyLevelSet(f"minimum {v} exceeds requested level {level}")
    p0 = S.project(ref)
    if f.eval(p0) <= level + tol:
        return p0
    raw_level = level - f.value_shift

    if isinstance(f, AbsShift):
        iv = _as_interval(S)
        lo = max(iv[0], f.shift - raw_level)
        hi = min(iv[1], f.shift + raw_level)
        return np.array([min(max(ref[0], lo), hi)])

    if isinstance(f, MaxAbs) and isinstance(S, (Box, Cut)) and _boxlike(S):
        trimmed = _intersect_box(S, -raw_level * np.ones(S.dim), raw_level * np.ones(S.dim))
        return trimmed.project(ref)

    if isinstance(f, ScaledNorm):
        ball = Ball(f.center, raw_level / f.scale)
        return _dykstra_pair(S, ball, ref)

    qf = _quad_form(f)
    if qf is not None:
        return _sublevel_bisection(S, qf, level, ref, tol)

    # generic: multiplier bisection with iterative inner solves
    G = getattr(getattr(f, "regularity", None), "lipschitz_G", None) or 1.0

    def x_of(lam):
        fv = lambda x: float((x - ref) @ (x - ref)) + lam * f.eval(x)
        fg = lambda x: 2.0 * (x - ref) + lam * f.subgradient(x)
        return _iterative_min(S, fv, fg, 2.0 * S.diameter_bound() + lam * G)

    return _bisect_multiplier(x_of, lambda x: f.eval(x) - level, tol)


def _boxlike(S: ConvexSet) -> bool:
    return isinstance(S, Box) or (isinstance(S, Cut) and isinstance(S.base, Box))


def _intersect_box(S: ConvexSet, lo, hi) -> ConvexSet:
    d = S.dim
    cuts = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        cuts.append(Halfspace(e.copy(), lo[i]))
        cuts.append(Halfspace(-e, -hi[i]))
    if isinstance(S, Cut):
        return Cut(S.base, S.cuts + tuple(cuts))
    return Cut(S, tuple(cuts))


def _dykstra_pair(A: ConvexSet, B: ConvexSet, z: np.ndarray) -> np.ndarray:
    from .geometry import DYKSTRA_MAX_ITER, proj_tol

    x = z.copy()
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    tol = proj_tol(z)
    for _ in range(DYKSTRA_MAX_ITER):
        x_old = x
        y = A.project(x + p)
        p = x + p - y
        x = B.project(y + q)
        q = y + q - x
        if float(np.linalg.norm(x - x_old)) < tol:
            break
    else:
        raise IterationLimit("alternating projections did not converge")
    return x


def _sublevel_bisection(S, qf, level, ref, tol) -> np.ndarray:
    q, c, const = qf

    def x_of(lam):
        qq = 2.0 * np.ones_like(q) + lam * q
        cc = -2.0 * ref + lam * c
        x, _, _ = _minimize_quadratic(S, qq, cc, 0.0)
        return x

    gap = lambda x: _quad_eval(q, c, const, x) - level
    return _bisect_multiplier(x_of, gap, tol)


def _bisect_multiplier(x_of, gap, tol) -> np.ndarray:
    lam_lo, lam_hi = 0.0, 1.0
    x_hi = x_of(lam_hi)
    doublings = 0
    while gap(x_hi) > 0.0:
        lam_hi *= 2.0
        x_hi = x_of(lam_hi)
        doublings += 1
        if doublings > 200:
            raise BisectionFailure("sublevel multiplier search failed to bracket")
    for _ in range(SUBLEVEL_BISECT_STEPS):
        mid = 0.5 * (lam_lo + lam_hi)
        xm = x_of(mid)
        if gap(xm) > 0.0:
            lam_lo = mid
        else:
            lam_hi, x_hi = mid, xm
        if lam_hi - lam_lo < 1e-16 * (1.0 + lam_hi):
            break
    return x_hi
