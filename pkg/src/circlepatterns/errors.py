"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`CirclePatternError`, so callers can catch the whole family at once.
Input-validation errors additionally derive from :class:`ValueError`.
"""


class CirclePatternError(Exception):
    """Base class for all package errors."""


# -- combinatorics ---------------------------------------------------------

class NonBipartite(CirclePatternError, ValueError):
    pass


class NonManifoldEdge(CirclePatternError, ValueError):
    pass


class InconsistentOrientation(CirclePatternError, ValueError):
    pass


class MissingLabel(CirclePatternError, ValueError):
    pass


# -- lattice generation ----------------------------------------------------

class DegenerateDomain(CirclePatternError, ValueError):
    pass


class PlaneContainsLatticeSegment(CirclePatternError, ValueError):
    pass


class DegenerateFacetProjection(CirclePatternError, ValueError):
    pass


class DegenerateOffset(CirclePatternError, ValueError):
    """The plane passes through a lattice facet of codimension four or more."""


class InconsistentDirections(CirclePatternError, ValueError):
    pass


class NotFlippable(CirclePatternError, ValueError):
    pass


# -- kernels ---------------------------------------------------------------

class ThetaOutOfRange(CirclePatternError, ValueError):
    pass


class YOutOfRange(CirclePatternError, ValueError):
    pass


class BoundaryVertex(CirclePatternError, ValueError):
    pass


class NeighborMissing(CirclePatternError, KeyError):
    pass


# -- solvers ---------------------------------------------------------------

class NoConvergence(CirclePatternError, RuntimeError):
    def __init__(self, iterations, residual, message=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message or
                         f"no convergence after {iterations} iterations "
                         f"(worst residual {residual:.3e})")


class InvalidBoundary(CirclePatternError, ValueError):
    pass


class KiteConditionViolated(CirclePatternError, ValueError):
    def __init__(self, face, message=None):
        self.face = face
        super().__init__(message or f"kite condition violated on face {face}")


class ClosingConditionInfeasible(CirclePatternError, ValueError):
    pass


class NotAPattern(CirclePatternError, ValueError):
    pass


# -- layout ----------------------------------------------------------------

class ResidualTooLarge(CirclePatternError, ValueError):
    pass


class NonClosingFan(CirclePatternError, RuntimeError):
    def __init__(self, vertex, gap):
        self.vertex = vertex
        self.gap = gap
        super().__init__(f"fan at vertex {vertex} does not close (gap {gap:.3e})")


class DegenerateEdge(CirclePatternError, ValueError):
    pass


class CombinatoricsMismatch(CirclePatternError, ValueError):
    pass


class MissingValue(CirclePatternError, KeyError):
    pass


class InconsistentExtension(CirclePatternError, RuntimeError):
    pass


class BoundaryMismatch(CirclePatternError, ValueError):
    pass


# -- potential theory ------------------------------------------------------

class PoleHit(CirclePatternError, ZeroDivisionError):
    pass


class NoMonotonePath(CirclePatternError, ValueError):
    pass


class QuadratureFailure(CirclePatternError, RuntimeError):
    pass


class SamePoint(CirclePatternError, ValueError):
    pass


class DiskNotCovered(CirclePatternError, ValueError):
    pass


class SingularSystem(CirclePatternError, RuntimeError):
    pass


class NotHarmonic(CirclePatternError, ValueError):
    pass


class NegativeValue(CirclePatternError, ValueError):
    pass


class NotNeighbors(CirclePatternError, ValueError):
    pass


# -- harness ---------------------------------------------------------------

class VanishingDerivative(CirclePatternError, ValueError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"g' vanishes at vertex {vertex}")


class OscillationTooLarge(CirclePatternError, ValueError):
    pass


class AnchorNotFound(CirclePatternError, ValueError):
    pass
