"""Instance generators: oblivious lower-bound families, period-freezing
adaptive adversaries, the margin-floor directional family, and a seeded
random 1-d corpus for competitive-ratio testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .geometry import Box, ConvexSet, Halfspace, intersect_halfspace
from .objectives import (
    AbsShift,
    LinearPlusQuad,
    MaxAbs,
    Objective,
    Quadratic,
    Regularity,
    ScaledNorm,
    SquaredNorm,
)

SQRT2 = math.sqrt(2.0)


class XorShift64Star:
    """Deterministic 64-bit PRNG (xorshift64* family); seed recorded in
    instance metadata so corpora are reproducible bit-for-bit."""

    MASK = (1 << 64) - 1
    MULT = 2685821657736338717

    def __init__(self, seed: int):
        self.state = (int(seed) & self.MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12) & self.MASK
        x = (x ^ (x << 25)) & self.MASK
        x ^= (x >> 27) & self.MASK
        self.state = x
        return (x * self.MULT) & self.MASK

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (2.0 ** -53)
        return lo + u * (hi - lo)

    def choice_bit(self) -> bool:
        return bool(self.next_u64() & 1)


# ---------------------------------------------------------------------------
# feeds


class Feed:
    def reveal(self, t: int, x_prev: np.ndarray) -> ConvexSet:
        raise NotImplementedError

    def observe(self, t: int, x_t: np.ndarray) -> None:
        pass

    def report(self) -> dict:
        return {}

    @property
    def revealed(self) -> list[ConvexSet]:
        raise NotImplementedError


class ObliviousFeed(Feed):
    def __init__(self, sets: Sequence[ConvexSet]):
        self.sets = list(sets)
        self._seen: list[ConvexSet] = []

    def reveal(self, t, x_prev):
        S = self.sets[t - 1]
        self._seen.append(S)
        return S

    @property
    def revealed(self):
        return self._seen


class PeriodAdversaryFeed(Feed):
    """Reveals one extra tangent cut each time the player enters the
    eps-ball of the current period's minimizer; freezes afterwards."""

    def __init__(self, domain: ConvexSet, minimizers: list[np.ndarray], eps: float, x0: np.ndarray):
        self.minimizers = minimizers
        self.eps = eps
        self.K = len(minimizers)
        self.k = 1
        self.current = intersect_halfspace(domain, self._cut(0))
        self.period_starts = {1: 1}
        self.completed: dict[int, int] = {}
        self._seen: list[ConvexSet] = []
        if float(np.linalg.norm(x0 - self.minimizers[0])) <= eps:
            self.completed[1] = 0

    def _cut(self, idx: int) -> Halfspace:
        m = self.minimizers[idx]
        return Halfspace(m.copy(), float(m @ m))

    def reveal(self, t, x_prev):
        while self.k < self.K and self.k in self.completed:
            self.k += 1
            self.current = intersect_halfspace(self.current, self._cut(self.k - 1))
            self.period_starts[self.k] = t
        self._seen.append(self.current)
        return self.current

    def observe(self, t, x_t):
        if self.k not in self.completed:
            if float(np.linalg.norm(x_t - self.minimizers[self.k - 1])) <= self.eps:
                self.completed[self.k] = t

    def report(self):
        return {
            "periods_constructed": self.K,
            "period_starts": dict(self.period_starts),
            "periods_completed": len(self.completed),
            "completion_times": dict(self.completed),
        }

    @property
    def revealed(self):
        return self._seen


# ---------------------------------------------------------------------------
# instances


@dataclass
class Instance:
    family: str
    T: int
    x0: np.ndarray
    domain: ConvexSet
    objective: Optional[Objective] = None
    per_step: Optional[list[Objective]] = None
    sets: Optional[list[ConvexSet]] = None
    feed_factory: Optional[Callable[[], Feed]] = None
    meta: dict = field(default_factory=dict)

    def objective_at(self, t: int) -> Objective:
        if self.per_step is not None:
            return self.per_step[t - 1]
        return self.objective

    @property
    def adaptive(self) -> bool:
        return self.sets is None

    def start_feed(self) -> Feed:
        if self.sets is not None:
            return ObliviousFeed(self.sets)
        return self.feed_factory()

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "T": self.T,
            "x0": self.x0.tolist(),
            "domain": self.domain.to_json(),
            "meta": self.meta,
        }
        if self.per_step is not None:
            out["per_step_objectives"] = [f.to_json() for f in self.per_step]
        else:
            out["objective"] = self.objective.to_json()
        if self.sets is not None:
            out["sets"] = [S.to_json() for S in self.sets]
        else:
            out["adaptive"] = True
        return out


def _tangent_cut(point: np.ndarray) -> Halfspace:
    """Halfspace whose boundary supports the origin-centered ball at point,
    keeping the side away from the origin."""
    return Halfspace(point.copy(), float(point @ point))


def _oscillation_minimizers(r0: float, k: float, count: int) -> list[np.ndarray]:
    """Minimizer chain alternating between the axis line p=0 and p=-k, each
    obtained from the previous one's supporting tangent."""
    stars = [np.array([0.0, -r0])]
    r = r0
    for t in range(1, count):
        if t % 2 == 1:
            stars.append(np.array([-k, -r]))
        else:
            r = r + k * k / r
            stars.append(np.array([0.0, -r]))
    return stars


def _oscillation_domain(r0: float, D: float) -> Box:
    w = D / (2.0 * SQRT2)
    return Box(np.array([-w, -r0 - D / SQRT2]), np.array([w, -r0]))


def _squared_norm_objective(domain: Box) -> SquaredNorm:
    corners = np.abs(np.stack([domain.lo, domain.hi]))
    r_max = float(np.linalg.norm(np.max(corners, axis=0)))
    return SquaredNorm(
        dim=2,
        regularity=Regularity(lipschitz_G=2.0 * r_max, strong_convexity_mu=2.0, smoothness_L=2.0),
    )


def gen_sc_lower_bound(T: int, r0: float = 1.0, D: float = 4.0) -> Instance:
    """Oscillating tangent-cut family with a strongly convex loss; the greedy
    minimizer chain zigzags between two vertical lines k apart."""
    if T < 2 or r0 <= 0 or D <= 0:
        raise ParameterError("require T >= 2, r0 > 0, D > 0")
    k = math.sqrt((D / SQRT2) * r0 / (T / 2.0 + 1.0))
    if k > D / (2.0 * SQRT2) + 1e-12:
        raise ParameterError(f"line spacing k={k:.4g} exceeds the admissible half-width")
    domain = _oscillation_domain(r0, D)
    stars = _oscillation_minimizers(r0, k, T + 1)
    if -stars[-1][1] > r0 + D / SQRT2 + 1e-9:
        raise ParameterError("minimizer chain leaves the admissible set before T")
    sets: list[ConvexSet] = []
    S: ConvexSet = domain
    for t in range(1, T + 1):
        S = intersect_halfspace(S, _tangent_cut(stars[t]))
        if not S.contains(stars[t], S.feas_tol()):
            raise ParameterError(f"target minimizer at step {t} left the feasible set")
        sets.append(S)
    return Instance(
        family="sc_lb",
        T=T,
        x0=stars[0].copy(),
        domain=domain,
        objective=_squared_norm_objective(domain),
        sets=sets,
        meta={"r0": r0, "D": D, "k": k, "minimizers": [s.tolist() for s in stars]},
    )


def gen_frozen(T_freeze: int, T: int, r0: float = 1.0, D: float = 4.0) -> Instance:
    """Simulation-reproduction family: the oscillating construction is revealed
    one cut per step starting from the uncut admissible set, then frozen.

    The first set carries no cut (the player starts at its minimizer), and the
    anchor spacing uses k = sqrt(r0 / (T_freeze/2 + 1)); this pairing is what
    reproduces the published single late jump of the budget-gated policy.
    """
    if T_freeze < 2 or T_freeze > T:
        raise ParameterError("require 2 <= T_freeze <= T")
    k = math.sqrt(r0 / (T_freeze / 2.0 + 1.0))
    domain = _oscillation_domain(r0, D)
    if k > D / (2.0 * SQRT2) + 1e-12:
        raise ParameterError(f"line spacing k={k:.4g} exceeds the admissible half-width")
    stars = _oscillation_minimizers(r0, k, T_freeze)
    sets: list[ConvexSet] = [domain]
    S: ConvexSet = domain
    for t in range(2, T_freeze + 1):
        S = intersect_halfspace(S, _tangent_cut(stars[t - 1]))
        sets.append(S)
    sets.extend([S] * (T - T_freeze))
    return Instance(
        family="frozen",
        T=T,
        x0=stars[0].copy(),
        domain=domain,
        objective=_squared_norm_objective(domain),
        sets=sets,
        meta={
            "r0": r0,
            "D": D,
            "k": k,
            "T_freeze": T_freeze,
            "minimizers": [s.tolist() for s in stars],
        },
    )


def gen_convex_lower_bound(T: int, D: float = 4.0, a: Optional[float] = None, k: Optional[float] = None) -> Instance:
    """Flat-loss oscillation family: minimizers alternate between the two
    vertical sides of a square, descending by a geometrically shrinking step,
    so any minimizer-chasing policy pays a constant per step.

    The descent is floored well above the near-minimizer surrogate width so
    that the chain of unique minimizers survives floating point for any T.
    """
    w = D / (2.0 * SQRT2)
    a = w if a is None else float(a)
    k = w / 2.0 if k is None else float(k)
    if a < w - 1e-12:
        raise ParameterError(f"need a >= D/(2*sqrt(2)) = {w:.4g}, got {a}")
    if k > w + 1e-12:
        raise ParameterError(f"need k <= D/(2*sqrt(2)) = {w:.4g}, got {k}")
    domain = Box(np.array([-w, -a - D / SQRT2]), np.array([w, -a]))
    descent_floor = 1e-6 * (1.0 + a + D)
    if 2.0 * k + (T + 1) * descent_floor > D / SQRT2 + 1e-12:
        raise ParameterError("horizon too long for the descent floor; reduce k or T")
    mins = []
    drop = 0.0
    for t in range(1, T + 2):
        drop += max(k / (2.0 ** (t - 1)), descent_floor)
        p = -w if t % 2 == 1 else w
        mins.append(np.array([p, -a - drop]))
    sets: list[ConvexSet] = []
    S: ConvexSet = domain
    for t in range(1, T + 1):
        m0, m1 = mins[t - 1], mins[t]
        d = m1 - m0
        n = np.array([-d[1], d[0]])
        if float(n @ m0) < 0:
            n = -n
        S = intersect_halfspace(S, Halfspace(n, float(n @ m0)))
        if not S.contains(m0, S.feas_tol()):
            raise ParameterError(f"target minimizer at step {t} left the feasible set")
        sets.append(S)
    return Instance(
        family="convex_lb",
        T=T,
        x0=np.array([0.0, -a]),
        domain=domain,
        objective=MaxAbs(dim=2),
        sets=sets,
        meta={"D": D, "a": a, "k": k, "minimizers": [m.tolist() for m in mins]},
    )


def gen_directional(D: float, T: int) -> Instance:
    """Margin-floor family on [0, D]^2: one diagonal floor x1 + x2 >= t per
    step, with the mildest curvature that keeps lazy projections from ever
    overtaking the future feasible minimum."""
    if D <= 2:
        raise ParameterError("require D > 2")
    if T > D:
        raise ParameterError("require T <= D")
    curvature = 4.0 / ((D - 2.0) ** 2)
    domain = Box(np.zeros(2), np.array([D, D]))
    g_max = math.hypot(1.0 + 2.0 * curvature * D, 1.0)
    f = LinearPlusQuad(
        curvature,
        regularity=Regularity(lipschitz_G=g_max, smoothness_L=2.0 * curvature),
    )
    diag = np.array([1.0, 1.0])
    sets: list[ConvexSet] = []
    S: ConvexSet = domain
    for t in range(1, T + 1):
        S = intersect_halfspace(S, Halfspace(diag.copy(), float(t)))
        sets.append(S)
    return Instance(
        family="directional",
        T=T,
        x0=np.array([0.0, 1.0]),
        domain=domain,
        objective=f,
        sets=sets,
        meta={"D": D, "curvature": curvature},
    )


def _period_adversary(
    kind: str,
    a: float,
    b: float,
    B: float,
    eps: float,
    T: int,
    objective: Objective,
    cbar: float,
    extra_meta: dict,
) -> Instance:
    if not (b > a > 0 and B > 0):
        raise ParameterError("require b > a > 0 and B > 0")
    if not (0 < eps < B / (3.0 * SQRT2)):
        raise ParameterError(f"require 0 < eps < B/(3*sqrt(2)) = {B / (3 * SQRT2):.4g}")
    K = int(math.floor(math.log(T) / math.log(1.0 + cbar))) + 1 if T > 1 else 1
    delta = (b - a) / K
    if not a > B * B / (4.0 * delta):
        raise ParameterError(
            f"no valid vertical step: need a > B^2*K/(4(b-a)) = {B * B * K / (4 * (b - a)):.4g}"
        )
    mins = [
        np.array([((-1.0) ** kk) * B / (2.0 * SQRT2), -(a + kk * delta)])
        for kk in range(1, K + 1)
    ]
    domain = Box(np.array([-B / (2.0 * SQRT2), -b]), np.array([B / (2.0 * SQRT2), -a]))
    x0 = mins[0].copy()
    meta = {
        "a": a,
        "b": b,
        "B": B,
        "eps": eps,
        "K": K,
        "delta": delta,
        "cbar": cbar,
        "min_period_move": B / SQRT2 - 2.0 * eps,
        "minimizers": [m.tolist() for m in mins],
        **extra_meta,
    }
    return Instance(
        family=kind,
        T=T,
        x0=x0,
        domain=domain,
        objective=objective,
        feed_factory=lambda: PeriodAdversaryFeed(domain, mins, eps, x0),
        meta=meta,
    )


def adversary_sharp(
    a: float, b: float, B: float, c: float, eps: float, T: int
) -> Instance:
    """Adaptive adversary for a scaled-norm loss: each period pins a tangent
    cut and waits until the player enters the eps-ball of its minimizer."""
    if c <= 0:
        raise ParameterError("require c > 0")
    r_max = math.sqrt(B * B / 8.0 + b * b)
    eta = c * eps * eps / (2.0 * r_max + eps)
    cbar = r_max * (2.0 * r_max + eps) / (eps * eps)
    f = ScaledNorm(
        c,
        np.zeros(2),
        regularity=Regularity(lipschitz_G=c, sharpness_alpha=c),
    )
    return _period_adversary(
        "sharp_adv", a, b, B, eps, T, f, cbar, {"c": c, "R_max": r_max, "eta": eta}
    )


def adversary_sc(
    a: float,
    b: float,
    B: float,
    eps: float,
    c_R: float = 1.0,
    lam: float = 0.0,
    T: int = 128,
) -> Instance:
    """Adaptive adversary for the unit quadratic loss; c_R and lam record the
    regret-budget envelope the construction is designed against."""
    if not 0 <= lam < 1:
        raise ParameterError("require 0 <= lam < 1")
    r_max = math.sqrt(B * B / 8.0 + b * b)
    eta = eps * eps / 2.0
    cbar = r_max * r_max / (eps * eps)
    f = Quadratic(
        np.zeros(2),
        regularity=Regularity(lipschitz_G=r_max, strong_convexity_mu=1.0, smoothness_L=1.0),
    )
    return _period_adversary(
        "sc_adv",
        a,
        b,
        B,
        eps,
        T,
        f,
        cbar,
        {"R_max": r_max, "eta": eta, "c_R": c_R, "lam": lam},
    )


def gen_random_1d_lin(
    T: int, seed: int, sharp_alpha: Optional[float] = None
) -> Instance:
    """Seeded corpus of nested shrinking intervals with per-step nonnegative
    piecewise-linear losses; sharp_alpha pins every loss slope (used for the
    sharp competitive-ratio tests)."""
    if T < 1:
        raise ParameterError("require T >= 1")
    rng = XorShift64Star(seed)
    lo, hi = 0.0, 10.0
    domain = Box(np.array([lo]), np.array([hi]))
    sets: list[ConvexSet] = []
    per_step: list[Objective] = []
    cur_lo, cur_hi = lo, hi
    S: ConvexSet = domain
    e = np.array([1.0])
    for t in range(T):
        width = cur_hi - cur_lo
        shrink_lo = rng.uniform(0.0, 0.05) * width
        shrink_hi = rng.uniform(0.0, 0.05) * width
        cur_lo += shrink_lo
        cur_hi -= shrink_hi
        if shrink_lo > 0:
            S = intersect_halfspace(S, Halfspace(e.copy(), cur_lo))
        if shrink_hi > 0:
            S = intersect_halfspace(S, Halfspace(-e, -cur_hi))
        sets.append(S)
        m = rng.uniform(lo, hi)
        if sharp_alpha is not None:
            f = (
                AbsShift(m)
                if sharp_alpha == 1.0 and rng.choice_bit()
                else ScaledNorm(sharp_alpha, np.array([m]))
            )
        else:
            f = (
                AbsShift(m)
                if rng.choice_bit()
                else ScaledNorm(rng.uniform(0.5, 2.0), np.array([m]))
            )
        per_step.append(f)
    x0 = np.array([rng.uniform(lo, hi)])
    return Instance(
        family="random_1d",
        T=T,
        x0=x0,
        domain=domain,
        per_step=per_step,
        sets=sets,
        meta={"seed": seed, "sharp_alpha": sharp_alpha, "interval": [lo, hi]},
    )


def cones_from_random_1d(lin_instance: Instance) -> Instance:
    """Reuse a random 1-d corpus instance with a single fixed loss (the first
    per-step loss), turning it into a fixed-objective nested-set run."""
    return Instance(
        family="random_1d_cones",
        T=lin_instance.T,
        x0=lin_instance.x0.copy(),
        domain=lin_instance.domain,
        objective=lin_instance.per_step[0],
        sets=list(lin_instance.sets),
        meta=dict(lin_instance.meta),
    )


# ---------------------------------------------------------------------------
# family registry (CLI surface)

FAMILY_PARAMS = {
    "sc_lb": {"r0", "D"},
    "convex_lb": {"D", "a", "k"},
    "directional": {"D"},
    "frozen": {"T_freeze", "r0", "D"},
    "sharp_adv": {"a", "b", "B", "c", "eps"},
    "sc_adv": {"a", "b", "B", "eps", "c_R", "lam"},
    "random_1d": {"seed", "sharp_alpha"},
    "random_1d_cones": {"seed", "sharp_alpha"},
}


def make_instance(family: str, T: int, params: Optional[dict] = None) -> Instance:
    params = dict(params or {})
    if family not in FAMILY_PARAMS:
        raise ParameterError(
            f"unknown family {family!r}; choose from {sorted(FAMILY_PARAMS)}"
        )
    unknown = set(params) - FAMILY_PARAMS[family]
    if unknown:
        raise ParameterError(
            f"unknown parameters for family {family!r}: {sorted(unknown)}"
        )
    if family == "sc_lb":
        return gen_sc_lower_bound(T, params.get("r0", 1.0), params.get("D", 4.0))
    if family == "convex_lb":
        return gen_convex_lower_bound(
            T, params.get("D", 4.0), params.get("a"), params.get("k")
        )
    if family == "directional":
        return gen_directional(params.get("D", float(T + 10)), T)
    if family == "frozen":
        return gen_frozen(
            int(params.get("T_freeze", 7)), T, params.get("r0", 1.0), params.get("D", 4.0)
        )
    if family == "sharp_adv":
        return adversary_sharp(
            params.get("a", 1.0),
            params.get("b", 2.0),
            params.get("B", 1.1),
            params.get("c", 1.0),
            params.get("eps", 0.25),
            T,
        )
    if family == "sc_adv":
        return adversary_sc(
            params.get("a", 1.0),
            params.get("b", 2.0),
            params.get("B", 1.1),
            params.get("eps", 0.25),
            params.get("c_R", 1.0),
            params.get("lam", 0.0),
            T,
        )
    if family == "random_1d":
        return gen_random_1d_lin(
            T, int(params.get("seed", 0)), params.get("sharp_alpha")
        )
    inst = gen_random_1d_lin(T, int(params.get("seed", 0)), params.get("sharp_alpha"))
    return cones_from_random_1d(inst)


def family_names() -> list[str]:
    return sorted(FAMILY_PARAMS)
