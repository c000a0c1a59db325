"""Exception types shared across the package."""


class ShiftSpaceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGridError(ShiftSpaceError):
    """Grid parameters are out of range (start >= stop, count < 2, ...)."""


class GridMismatchError(ShiftSpaceError):
    """Two sampled objects were expected to share a grid but do not."""


class TruncationError(ShiftSpaceError):
    """A lattice sum or window cannot be truncated within the requested
    tolerance under the generator's declared decay."""


class MissingTimeDomainError(ShiftSpaceError):
    """An operation needs gen.time_domain but the generator has none."""


class ResolutionError(ShiftSpaceError):
    """A grid is too coarse to resolve the requested oscillation."""


class SingularGramError(ShiftSpaceError):
    """The Gram matrix is numerically singular (condition > 1e12)."""
