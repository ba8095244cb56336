"""Exception hierarchy shared by the library and the command line."""


class PlausError(Exception):
    """Base class for all library errors."""


class ArgumentError(PlausError, ValueError):
    """Malformed input: wrong dimensions, bad option values, unparseable data."""


class DomainError(PlausError, ValueError):
    """A parameter or dataset lies outside the model's admissible domain."""


class CapabilityError(PlausError, NotImplementedError):
    """The requested computation is not supported by this model."""


class NumericError(PlausError, ArithmeticError):
    """A numerical procedure failed (singular matrix, bracket failure, ...)."""


class FitError(NumericError):
    """Likelihood maximization did not converge.

    The best point found so far is kept on ``best`` so callers can decide
    whether it is usable.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
