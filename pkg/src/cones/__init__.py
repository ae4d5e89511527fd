"""Online convex optimization over nested shrinking feasible sets: policies,
adversarial instance families, offline references, and a benchmark harness."""

from .errors import (
    BisectionFailure,
    ConesError,
    DegenerateFit,
    DimensionMismatch,
    EmptyIntersection,
    EmptyLevelSet,
    EmptySet,
    InfeasibleGrid,
    IterationLimit,
    ParameterError,
)
from .geometry import Ball, Box, ConvexSet, Cut, Halfspace, assert_nested, intersect_halfspace
from .objectives import (
    AbsShift,
    LinearPlusQuad,
    MaxAbs,
    Objective,
    Quadratic,
    Regularity,
    ScaledNorm,
    SquaredNorm,
    check_alpha_sharp,
)
from .solvers import MinResult, minimize_over, nearest_minimizer, project_sublevel
from .algorithms import StepOutcome, lin_cost, make_policy, policy_names
from .instances import Instance, make_instance, family_names
from .oracle import OfflineResult, brute_force_min_grid, offline_lin_dp_1d, static_opt
from .harness import Trace, emit_csv, emit_json, fit_loglog_slope, run, sweep_T

__version__ = "0.1.0"
