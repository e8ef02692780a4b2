"""Exception types raised across the package."""


class SlideAreaError(Exception):
    """Base class for all package errors."""


class DomainError(SlideAreaError, ValueError):
    """Parameter or point outside the admissible domain."""


class BreakpointError(SlideAreaError, ValueError):
    """Derivative requested at a breakpoint; use one_sided_tangents instead."""


class SingularParametrizationError(SlideAreaError, ValueError):
    """Velocity vanishes, so tangent and curvature are undefined."""


class CuspError(SlideAreaError, ValueError):
    """Opposite one-sided tangents (T- + T+ = 0) are not supported."""


class NonsmoothError(SlideAreaError, ValueError):
    """A smooth-only routine was called with a vertex at a breakpoint."""


class UndefinedVertexError(SlideAreaError, ValueError):
    """Consecutive tangent lines are parallel, so their intersection is missing."""


class FamilyDegenerateError(SlideAreaError, ValueError):
    """Input lies outside a closed-form family (parallel or concurrent lines, flat triangle, ...)."""


class PreconditionError(SlideAreaError, ValueError):
    """A geometric precondition (transversality, Morse, criticality) failed."""


class CountMismatchError(SlideAreaError, RuntimeError):
    """A construction expected a fixed number of solutions and found a different one."""


class DegenerateStepError(SlideAreaError, RuntimeError):
    """A billiard step has no well-defined successor (tangent or grazing line)."""


class InsufficientDataError(SlideAreaError, ValueError):
    """Not enough samples for a fit."""
