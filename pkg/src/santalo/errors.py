"""Exception types shared across the library and mapped to CLI exit codes."""


class SantaloError(Exception):
    """Base class for all library errors."""


class InputError(SantaloError):
    """Invalid user input: malformed body specs, out-of-domain parameters."""


class MalformedBodyError(InputError):
    """Body violates a structural invariant (unbounded, empty interior, bad matrix)."""


class DomainError(InputError):
    """Parameter outside the mathematical domain of a formula."""


class NotSmoothError(InputError):
    """Operation requires a smooth boundary the body does not have."""


class NumericError(SantaloError):
    """Numerical failure during an otherwise well-posed computation."""


class PoleError(NumericError):
    """Integrand blew up: the evaluation point is at or beyond the body boundary.

    Attributes
    ----------
    node : ndarray or None
        The quadrature node (direction) at which the pole was detected.
    index : int or None
        Index of that node in the rule.
    """

    def __init__(self, message, node=None, index=None):
        super().__init__(message)
        self.node = node
        self.index = index


class ConvergenceError(NumericError):
    """Iteration cap exceeded; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class AccuracyError(NumericError):
    """Monte Carlo variance above the requested tolerance; carries the partial result."""

    def __init__(self, message, partial=None, stderr=None):
        super().__init__(message)
        self.partial = partial
        self.stderr = stderr


class EmptyRegionError(NumericError):
    """The requested level region is empty (level below the minimal volume product)."""
