"""Convex feasible sets: boxes, balls, and halfspace-cut intersections.

Sets are immutable. Projection is exact for boxes, balls, and cut sets in
dimension <= 3 (closed forms, polygon arithmetic in the plane, active-set
enumeration in d=3); higher dimensions and ball-based cut sets fall back to
Dykstra's alternating projections.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyIntersection, EmptySet, IterationLimit

DYKSTRA_MAX_ITER = 10_000


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert a coordinate sequence to a float vector."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise DimensionMismatch(f"expected a 1-d point, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p}")
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.size}")
    return p


def proj_tol(x: np.ndarray) -> float:
    """Stopping tolerance for iterative projection, relative to the query."""
    return 1e-10 * (1.0 + float(np.linalg.norm(x)))


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Closed halfspace {x : normal . x >= offset} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_point(self.normal)
        norm = float(np.linalg.norm(n))
        if norm <= 0.0:
            raise ValueError("halfspace normal must be nonzero")
        if abs(norm - 1.0) > 1e-14:  # keep unit normals bit-stable on roundtrips
            n = n / norm
            object.__setattr__(self, "offset", float(self.offset) / norm)
        else:
            object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "normal", n)

    def __eq__(self, other):
        return (
            isinstance(other, Halfspace)
            and np.array_equal(self.normal, other.normal)
            and self.offset == other.offset
        )

    @property
    def dim(self) -> int:
        return self.normal.size

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return float(self.normal @ x) >= self.offset - tol

    def project(self, x: np.ndarray) -> np.ndarray:
        gap = self.offset - float(self.normal @ x)
        return x + gap * self.normal if gap > 0.0 else x

    def to_json(self) -> dict:
        return {"a": self.normal.tolist(), "b": self.offset}


class ConvexSet:
    """Common interface of Box, Ball and Cut."""

    dim: int

    def contains(self, x, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def is_empty(self) -> bool:
        raise NotImplementedError

    def diameter_bound(self) -> float:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def feas_tol(self) -> float:
        """Membership slack, relative to the set scale."""
        return 1e-9 * (1.0 + self.diameter_bound())

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A point of the set: project a uniform draw from the bounding box."""
        lo, hi = self.bounding_box()
        return self.project(rng.uniform(lo, hi))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Axis-aligned box [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lo)
        hi = as_point(self.hi, dim=lo.size)
        if np.any(lo > hi):
            raise EmptySet(f"box is empty: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __eq__(self, other):
        return (
            isinstance(other, Box)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )

    @property
    def dim(self) -> int:
        return self.lo.size

    def contains(self, x, tol: float = 0.0) -> bool:
        p = as_point(x, dim=self.dim)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def project(self, x) -> np.ndarray:
        return np.clip(as_point(x, dim=self.dim), self.lo, self.hi)

    def is_empty(self) -> bool:
        return False

    def diameter_bound(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def bounding_box(self):
        return self.lo, self.hi

    def halfspaces(self) -> list[Halfspace]:
        out = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            out.append(Halfspace(e, self.lo[i]))
            out.append(Halfspace(-e, -self.hi[i]))
        return out

    def to_json(self) -> dict:
        return {"box": {"lo": self.lo.tolist(), "hi": self.hi.tolist()}}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    """Euclidean ball of given center and radius (radius 0 is a singleton)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        if self.radius < 0.0:
            raise EmptySet(f"negative radius {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
        )

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x, tol: float = 0.0) -> bool:
        p = as_point(x, dim=self.dim)
        return float(np.linalg.norm(p - self.center)) <= self.radius + tol

    def project(self, x) -> np.ndarray:
        p = as_point(x, dim=self.dim)
        d = p - self.center
        norm = float(np.linalg.norm(d))
        if norm <= self.radius:
            return p
        return self.center + d * (self.radius / norm)

    def is_empty(self) -> bool:
        return False

    def diameter_bound(self) -> float:
        return 2.0 * self.radius

    def bounding_box(self):
        r = self.radius
        return self.center - r, self.center + r

    def to_json(self) -> dict:
        return {"ball": {"center": self.center.tolist(), "r": self.radius}}


@dataclass(frozen=True, eq=False)
class Cut(ConvexSet):
    """A base set intersected with an ordered list of halfspaces.

    Appending another halfspace always yields a subset, which is what makes
    sequences built through intersect_halfspace structurally nested.
    """

    base: ConvexSet
    cuts: tuple[Halfspace, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.base, Cut):
            raise ValueError("Cut base must be a Box or Ball; extend cuts instead")
        cuts = tuple(self.cuts)
        for h in cuts:
            if h.dim != self.base.dim:
                raise DimensionMismatch("halfspace dimension differs from base")
        object.__setattr__(self, "cuts", cuts)

    def __eq__(self, other):
        return (
            isinstance(other, Cut)
            and self.base == other.base
            and self.cuts == other.cuts
        )

    @property
    def dim(self) -> int:
        return self.base.dim

    def contains(self, x, tol: float = 0.0) -> bool:
        p = as_point(x, dim=self.dim)
        if not self.base.contains(p, tol):
            return False
        return all(h.contains(p, tol) for h in self.cuts)

    def halfspaces(self) -> list[Halfspace]:
        """All linear constraints, box sides included (box base only)."""
        if not isinstance(self.base, Box):
            raise ValueError("halfspace form requires a Box base")
        return self.base.halfspaces() + list(self.cuts)

    # -- cached derived geometry (sets are immutable) --

    def _interval(self) -> Optional[tuple[float, float]]:
        """d=1 cut sets reduce to an interval; None when empty."""
        if "interval" not in self._cache:
            if isinstance(self.base, Ball):
                lo = float(self.base.center[0]) - self.base.radius
                hi = float(self.base.center[0]) + self.base.radius
            else:
                lo, hi = float(self.base.lo[0]), float(self.base.hi[0])
            for h in self.cuts:
                a, b = float(h.normal[0]), h.offset
                if a > 0:
                    lo = max(lo, b / a)
                else:
                    hi = min(hi, b / a)
            tol = self.base.feas_tol()
            self._cache["interval"] = None if lo > hi + tol else (min(lo, hi), hi)
        return self._cache["interval"]

    def _polygon(self) -> Optional[np.ndarray]:
        """Vertex list (CCW) of the planar polytope; None when empty."""
        if "polygon" not in self._cache:
            box = self.base
            verts = np.array(
                [
                    [box.lo[0], box.lo[1]],
                    [box.hi[0], box.lo[1]],
                    [box.hi[0], box.hi[1]],
                    [box.lo[0], box.hi[1]],
                ]
            )
            scale = 1.0 + box.diameter_bound()
            for h in self.cuts:
                verts = _clip_polygon(verts, h, scale)
                if verts is None:
                    break
            self._cache["polygon"] = verts
        return self._cache["polygon"]

    def project(self, x) -> np.ndarray:
        p = as_point(x, dim=self.dim)
        if self.contains(p, 0.0):
            return p
        if self.dim == 1 and isinstance(self.base, (Box, Ball)):
            iv = self._interval()
            if iv is None:
                raise EmptySet("projection onto an empty set")
            return np.array([min(max(p[0], iv[0]), iv[1])])
        if isinstance(self.base, Box):
            if self.dim == 2:
                poly = self._polygon()
                if poly is None:
                    raise EmptySet("projection onto an empty set")
                return _project_polygon(poly, p)
            if self.dim == 3:
                return _project_enum(self.halfspaces(), p, self.feas_tol())
        return self._project_dykstra(p)

    def _project_dykstra(self, p: np.ndarray) -> np.ndarray:
        sets: list = [self.base] + list(self.cuts)
        x = p.copy()
        incs = [np.zeros_like(p) for _ in sets]
        tol = proj_tol(p)
        for _ in range(DYKSTRA_MAX_ITER):
            x_prev = x.copy()
            for i, s in enumerate(sets):
                y = x + incs[i]
                x = s.project(y)
                incs[i] = y - x
            if float(np.linalg.norm(x - x_prev)) < tol:
                break
        else:
            if not self.contains(x, 10.0 * self.feas_tol()):
                raise IterationLimit("Dykstra projection did not converge")
        return x

    def is_empty(self) -> bool:
        if self.dim == 1 and isinstance(self.base, (Box, Ball)):
            return self._interval() is None
        if isinstance(self.base, Box):
            if self.dim == 2:
                return self._polygon() is None
            if self.dim == 3:
                return _empty_enum(self.halfspaces(), self.feas_tol())
        # generic fallback: feasibility search from the base centroid
        lo, hi = self.base.bounding_box()
        try:
            probe = self._project_dykstra((lo + hi) / 2.0)
        except IterationLimit:
            return True
        return not self.contains(probe, 10.0 * self.feas_tol())

    def diameter_bound(self) -> float:
        return self.base.diameter_bound()

    def bounding_box(self):
        return self.base.bounding_box()

    def to_json(self) -> dict:
        return {
            "cut": {
                "base": self.base.to_json(),
                "halfspaces": [h.to_json() for h in self.cuts],
            }
        }


# ---------------------------------------------------------------------------
# planar polygon helpers


def _clip_polygon(verts: np.ndarray, h: Halfspace, scale: float) -> Optional[np.ndarray]:
    """Sutherland-Hodgman clip of a convex polygon against a halfspace."""
    eps = 1e-12 * scale
    n = len(verts)
    if n == 0:
        return None
    vals = verts @ h.normal - h.offset
    if np.all(vals >= -eps):
        return verts
    if np.all(vals <= eps):
        # the halfspace can still graze the polygon at boundary vertices
        touch = verts[np.abs(vals) <= eps]
        return touch if len(touch) else None
    out = []
    for i in range(n):
        j = (i + 1) % n
        vi, vj = vals[i], vals[j]
        if vi >= -eps:
            out.append(verts[i])
        if (vi > eps and vj < -eps) or (vi < -eps and vj > eps):
            t = vi / (vi - vj)
            out.append(verts[i] + t * (verts[j] - verts[i]))
    if not out:
        return None
    cleaned = [out[0]]
    for v in out[1:]:
        if float(np.linalg.norm(v - cleaned[-1])) > eps:
            cleaned.append(v)
    if len(cleaned) > 1 and float(np.linalg.norm(cleaned[0] - cleaned[-1])) <= eps:
        cleaned.pop()
    return np.array(cleaned)


def _project_polygon(verts: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Nearest point of a convex polygon (or degenerate segment/point)."""
    n = len(verts)
    if n == 1:
        return verts[0].copy()
    best, best_d = None, np.inf
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n] if n > 2 else verts[1 - i]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
        q = a + t * ab
        d = float(np.linalg.norm(q - p))
        if d < best_d:
            best, best_d = q, d
        if n == 2:
            break
    return best


def polygon_vertices(S: ConvexSet) -> Optional[np.ndarray]:
    """Vertex list of a planar set (None if unavailable or empty)."""
    if isinstance(S, Box) and S.dim == 2:
        return Cut(S, ())._polygon()
    if isinstance(S, Cut) and S.dim == 2 and isinstance(S.base, Box):
        return S._polygon()
    return None


# ---------------------------------------------------------------------------
# d=3 active-set enumeration


def _candidate_enum(halves: list[Halfspace], p: np.ndarray):
    """Yield projections of p onto affine hulls of <= d constraint subsets."""
    d = p.size
    yield p
    A = np.array([h.normal for h in halves])
    b = np.array([h.offset for h in halves])
    m = len(halves)
    for size in range(1, d + 1):
        for idx in itertools.combinations(range(m), size):
            Ai = A[list(idx)]
            bi = b[list(idx)]
            # least-squares projection onto {Ai x = bi}
            M = Ai @ Ai.T
            try:
                lam = np.linalg.solve(M, bi - Ai @ p)
            except np.linalg.LinAlgError:
                continue
            yield p + Ai.T @ lam


def _project_enum(halves: list[Halfspace], p: np.ndarray, tol: float) -> np.ndarray:
    best, best_d = None, np.inf
    for c in _candidate_enum(halves, p):
        if all(h.contains(c, tol) for h in halves):
            d = float(np.linalg.norm(c - p))
            if d < best_d:
                best, best_d = c, d
    if best is None:
        raise EmptySet("projection onto an empty set")
    return best


def _empty_enum(halves: list[Halfspace], tol: float) -> bool:
    A = np.array([h.normal for h in halves])
    b = np.array([h.offset for h in halves])
    d = A.shape[1]
    m = len(halves)
    for idx in itertools.combinations(range(m), d):
        Ai = A[list(idx)]
        if abs(np.linalg.det(Ai)) < 1e-13:
            continue
        v = np.linalg.solve(Ai, b[list(idx)])
        if np.all(A @ v >= b - tol):
            return False
    return True


# ---------------------------------------------------------------------------
# module-level operations


def intersect_halfspace(S: ConvexSet, h: Halfspace) -> ConvexSet:
    """Refine S with one halfspace; raises EmptyIntersection if nothing is left."""
    if h.dim != S.dim:
        raise DimensionMismatch("halfspace dimension differs from set")
    if isinstance(S, Cut):
        out = Cut(S.base, S.cuts + (h,))
        prev = S._cache.get("polygon")
        if prev is not None and "polygon" not in out._cache:
            out._cache["polygon"] = _clip_polygon(
                prev, h, 1.0 + S.base.diameter_bound()
            )
    else:
        out = Cut(S, (h,))
    if out.is_empty():
        raise EmptyIntersection("cut removed every point of the set")
    return out


@dataclass
class NestedCheckReport:
    """Outcome of a nestedness audit over a sequence of sets."""

    violations: list[str]
    checked_pairs: int
    checked_samples: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _structurally_extends(child: ConvexSet, parent: ConvexSet) -> bool:
    if child is parent or child == parent:
        return True
    if isinstance(child, Cut):
        if isinstance(parent, Cut):
            return (
                child.base == parent.base
                and len(child.cuts) >= len(parent.cuts)
                and child.cuts[: len(parent.cuts)] == parent.cuts
            )
        return child.base == parent
    return False


def assert_nested(sets: Sequence[ConvexSet], samples: int = 32, seed: int = 0) -> NestedCheckReport:
    """Audit that each set structurally refines its predecessor and that random
    points of each set belong to the one before it."""
    rng = np.random.default_rng(seed)
    violations: list[str] = []
    n_samples = 0
    for t in range(1, len(sets)):
        prev, cur = sets[t - 1], sets[t]
        if not _structurally_extends(cur, prev):
            violations.append(f"step {t}: set is not a structural refinement")
        tol = prev.feas_tol() + cur.feas_tol()
        for _ in range(samples):
            p = cur.sample(rng)
            n_samples += 1
            if not prev.contains(p, tol):
                violations.append(f"step {t}: sampled point {p} escapes predecessor")
                break
    return NestedCheckReport(violations, max(len(sets) - 1, 0), n_samples)


def feasible_mask(S: ConvexSet, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Vectorized membership test for a batch of points of shape (n, d)."""
    if isinstance(S, Box):
        return np.all(pts >= S.lo - tol, axis=1) & np.all(pts <= S.hi + tol, axis=1)
    if isinstance(S, Ball):
        return np.linalg.norm(pts - S.center, axis=1) <= S.radius + tol
    if isinstance(S, Cut):
        mask = feasible_mask(S.base, pts, tol)
        if S.cuts:
            A = np.array([h.normal for h in S.cuts])
            b = np.array([h.offset for h in S.cuts])
            mask &= np.all(pts @ A.T >= b - tol, axis=1)
        return mask
    return np.array([S.contains(p, tol) for p in pts])


def set_from_json(obj: dict) -> ConvexSet:
    if "box" in obj:
        return Box(np.array(obj["box"]["lo"]), np.array(obj["box"]["hi"]))
    if "ball" in obj:
        return Ball(np.array(obj["ball"]["center"]), obj["ball"]["r"])
    if "cut" in obj:
        base = set_from_json(obj["cut"]["base"])
        cuts = tuple(Halfspace(np.array(h["a"]), h["b"]) for h in obj["cut"]["halfspaces"])
        return Cut(base, cuts)
    raise ValueError(f"unknown set encoding: {json.dumps(obj)[:80]}")
