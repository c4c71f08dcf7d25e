"""
Errors Module

Exception hierarchy shared by every curvecross module.
"""


class CurveCrossError(Exception):
    """Base class for all curvecross failures."""


class SurfaceError(CurveCrossError, ValueError):
    """Invalid surface description or inconsistent rotation system."""


class WalkError(CurveCrossError, ValueError):
    """A walk does not live on the surface, or a move does not apply."""


class PreconditionError(CurveCrossError):
    """An operation was called outside of its domain."""


class BudgetExceededError(CurveCrossError):
    """The brute-force oracle ran past its enumeration budget."""


class InternalInvariantError(CurveCrossError):
    """A structural invariant that must always hold was violated."""
