"""Exception types shared across the library."""


class ConesError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ConesError):
    """Operands have inconsistent dimensions."""


class EmptySet(ConesError):
    """Operation requires a nonempty set."""


class EmptyIntersection(ConesError):
    """A halfspace cut produced an empty set."""


class EmptyLevelSet(ConesError):
    """Requested sublevel set contains no feasible point."""


class IterationLimit(ConesError):
    """Iterative solver failed to reach its tolerance."""


class ParameterError(ConesError):
    """Instance-generator parameters are invalid or inconsistent."""


class InfeasibleGrid(ConesError):
    """No grid point lies inside some feasible set; refine the grid."""


class DegenerateFit(ConesError):
    """Not enough usable data for a log-log slope fit."""


class BisectionFailure(ConesError):
    """Root bracketing failed; the objective violates convexity assumptions."""
