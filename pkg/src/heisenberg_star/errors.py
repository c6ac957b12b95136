"""Exception types shared across the package."""


class StarError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(StarError, ValueError):
    """A physical parameter or run configuration is invalid."""


class OddBathSize(ParameterError):
    """The ring length N must be even."""


class CentralSpinTooLarge(ParameterError):
    """The central spin must satisfy 1 <= two_S <= N."""


class EmptySector(ParameterError):
    """The requested magnetization sector contains no basis states."""


class SectorCapacityError(StarError):
    """The requested sector exceeds the supported dimension cap."""


class SectorMismatch(StarError):
    """An operator was applied to a state from a different sector."""


class ConvergenceError(StarError):
    """An iterative solver stopped before reaching its tolerance.

    Carries the best residual seen so callers can report how close the
    run came.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
