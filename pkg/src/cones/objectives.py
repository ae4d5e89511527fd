"""Convex loss functions with value/subgradient oracles and regularity data.

Every objective is immutable. Kinks use a fixed deterministic subgradient
selection so that repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch
from .geometry import as_point


@dataclass(frozen=True)
class Regularity:
    """Known regularity constants of a loss on its admissible set."""

    lipschitz_G: Optional[float] = None
    strong_convexity_mu: Optional[float] = None
    smoothness_L: Optional[float] = None
    sharpness_alpha: Optional[float] = None

    def __post_init__(self):
        mu, L = self.strong_convexity_mu, self.smoothness_L
        if mu is not None and L is not None and mu > L * (1 + 1e-12):
            raise ValueError(f"strong convexity {mu} exceeds smoothness {L}")
        a, G = self.sharpness_alpha, self.lipschitz_G
        if a is not None and G is not None and a > G * (1 + 1e-12):
            raise ValueError(f"sharpness {a} exceeds Lipschitz constant {G}")


class Objective:
    """Base class: value + subgradient oracle.

    value_shift is an additive constant used to keep the loss nonnegative on
    the admissible set; it never changes minimizers or subgradients.
    """

    kind: str = "abstract"
    regularity: Regularity
    value_shift: float = 0.0

    def __call__(self, x) -> float:
        return self.eval(x)

    def eval(self, x) -> float:
        p = as_point(x, dim=self.dim_hint())
        return self._raw(p) + self.value_shift

    def subgradient(self, x) -> np.ndarray:
        return self._subgrad(as_point(x, dim=self.dim_hint()))

    def dim_hint(self) -> Optional[int]:
        return None

    def _raw(self, p: np.ndarray) -> float:
        raise NotImplementedError

    def _subgrad(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        out = {"kind": self.kind, **self.params()}
        if self.value_shift:
            out["value_shift"] = self.value_shift
        reg = {
            "G": self.regularity.lipschitz_G,
            "mu": self.regularity.strong_convexity_mu,
            "L": self.regularity.smoothness_L,
            "alpha": self.regularity.sharpness_alpha,
        }
        out["regularity"] = {k: v for k, v in reg.items() if v is not None}
        return out


@dataclass(frozen=True)
class Quadratic(Objective):
    """f(x) = 0.5 * ||x - center||^2."""

    center: np.ndarray
    regularity: Regularity = field(default=Regularity(strong_convexity_mu=1.0, smoothness_L=1.0))
    value_shift: float = 0.0
    kind = "quadratic"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))

    def dim_hint(self):
        return self.center.size

    def _raw(self, p):
        d = p - self.center
        return 0.5 * float(d @ d)

    def _subgrad(self, p):
        return p - self.center

    def params(self):
        return {"center": self.center.tolist()}


@dataclass(frozen=True)
class SquaredNorm(Objective):
    """f(x) = ||x||^2 (x1^2 + x2^2 in the plane)."""

    dim: int = 2
    regularity: Regularity = field(default=Regularity(strong_convexity_mu=2.0, smoothness_L=2.0))
    value_shift: float = 0.0
    kind = "squared_norm"

    def dim_hint(self):
        return self.dim

    def _raw(self, p):
        return float(p @ p)

    def _subgrad(self, p):
        return 2.0 * p

    def params(self):
        return {"dim": self.dim}


@dataclass(frozen=True)
class ScaledNorm(Objective):
    """f(x) = scale * ||x - center||, with subgradient 0 at the center."""

    scale: float
    center: np.ndarray
    regularity: Regularity = field(default=Regularity())
    value_shift: float = 0.0
    kind = "scaled_norm"

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "center", as_point(self.center))
        if self.regularity.lipschitz_G is None:
            object.__setattr__(
                self,
                "regularity",
                Regularity(lipschitz_G=self.scale, sharpness_alpha=self.scale),
            )

    def dim_hint(self):
        return self.center.size

    def _raw(self, p):
        return self.scale * float(np.linalg.norm(p - self.center))

    def _subgrad(self, p):
        d = p - self.center
        n = float(np.linalg.norm(d))
        if n == 0.0:
            return np.zeros_like(p)
        return self.scale * d / n

    def params(self):
        return {"scale": self.scale, "center": self.center.tolist()}


@dataclass(frozen=True)
class MaxAbs(Objective):
    """f(x) = max_i |x_i| (max(|x1|, |x2|) in the plane).

    Ties select the lowest coordinate index; Euclidean subgradient norms are 1,
    which is the Lipschitz constant recorded here (a computed value, since no
    tighter constant is published for this loss on the domains we use).
    """

    dim: int = 2
    regularity: Regularity = field(default=Regularity(lipschitz_G=1.0))
    value_shift: float = 0.0
    kind = "max_abs"

    def dim_hint(self):
        return self.dim

    def _raw(self, p):
        return float(np.max(np.abs(p)))

    def _subgrad(self, p):
        i = int(np.argmax(np.abs(p)))  # argmax returns the first maximizer
        g = np.zeros_like(p)
        g[i] = 1.0 if p[i] >= 0 else -1.0
        return g

    def params(self):
        return {"dim": self.dim}


@dataclass(frozen=True)
class LinearPlusQuad(Objective):
    """f(x1, x2) = x1 + x2 + curvature * x1^2 (convex, not strongly convex)."""

    curvature: float
    regularity: Regularity = field(default=Regularity())
    value_shift: float = 0.0
    kind = "linear_plus_quad"

    def __post_init__(self):
        if self.curvature < 0:
            raise ValueError("curvature must be nonnegative")
        if self.regularity.smoothness_L is None:
            object.__setattr__(
                self, "regularity", Regularity(smoothness_L=2.0 * self.curvature)
            )

    def dim_hint(self):
        return 2

    def _raw(self, p):
        return float(p[0] + p[1] + self.curvature * p[0] * p[0])

    def _subgrad(self, p):
        return np.array([1.0 + 2.0 * self.curvature * p[0], 1.0])

    def params(self):
        return {"curvature": self.curvature}


@dataclass(frozen=True)
class AbsShift(Objective):
    """One-dimensional f(x) = |x - shift|, subgradient 0 at the kink."""

    shift: float
    regularity: Regularity = field(default=Regularity(lipschitz_G=1.0, sharpness_alpha=1.0))
    value_shift: float = 0.0
    kind = "abs_shift"

    def dim_hint(self):
        return 1

    def _raw(self, p):
        return abs(float(p[0]) - self.shift)

    def _subgrad(self, p):
        d = float(p[0]) - self.shift
        if d > 0:
            return np.array([1.0])
        if d < 0:
            return np.array([-1.0])
        return np.array([0.0])

    def params(self):
        return {"shift": self.shift}


_KINDS = {
    "quadratic": lambda o: Quadratic(np.array(o["center"]), value_shift=o.get("value_shift", 0.0)),
    "squared_norm": lambda o: SquaredNorm(o.get("dim", 2), value_shift=o.get("value_shift", 0.0)),
    "scaled_norm": lambda o: ScaledNorm(
        o["scale"], np.array(o["center"]), value_shift=o.get("value_shift", 0.0)
    ),
    "max_abs": lambda o: MaxAbs(o.get("dim", 2), value_shift=o.get("value_shift", 0.0)),
    "linear_plus_quad": lambda o: LinearPlusQuad(
        o["curvature"], value_shift=o.get("value_shift", 0.0)
    ),
    "abs_shift": lambda o: AbsShift(o["shift"], value_shift=o.get("value_shift", 0.0)),
}


def objective_from_json(obj: dict) -> Objective:
    kind = obj.get("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    return _KINDS[kind](obj)


def with_shift(f: Objective, shift: float) -> Objective:
    """Copy of f with the given nonnegativity shift."""
    import dataclasses

    return dataclasses.replace(f, value_shift=float(shift))


@dataclass
class SharpnessReport:
    """Sampled audit of a lower growth bound f(x) - min >= alpha * dist."""

    violations: list[str]
    samples: int
    alpha: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_alpha_sharp(f, S, alpha: float, samples: int = 100, seed: int = 0) -> SharpnessReport:
    """Sample points of S and test the sharpness inequality against the
    near-minimizer set (computed through the solver surrogate)."""
    from . import solvers

    rng = np.random.default_rng(seed)
    res = solvers.minimize_over(f, S)
    delta = 1e-8 * (1.0 + abs(res.value))
    violations = []
    for i in range(samples):
        x = S.sample(rng)
        near = solvers.project_sublevel(f, S, res.value + delta, x)
        dist = float(np.linalg.norm(x - near))
        lhs = f.eval(x) - res.value
        if lhs < alpha * dist - 1e-7:
            violations.append(
                f"sample {i}: f-gap {lhs:.3e} < alpha*dist {alpha * dist:.3e} at x={x}"
            )
    return SharpnessReport(violations, samples, alpha)
