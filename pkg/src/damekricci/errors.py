"""Exception hierarchy shared by all modules."""


class DamekRicciError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DamekRicciError, ValueError):
    """Argument outside the domain where the quantity is defined."""


class PoleError(DomainError):
    """Evaluation at a pole (Gamma at non-positive integers, c-function at 0)."""


class PreconditionError(DamekRicciError, ValueError):
    """A documented precondition on parameters is violated."""


class ResolutionError(PreconditionError):
    """A quadrature grid is too coarse for the requested computation."""


class CalibrationError(DamekRicciError, RuntimeError):
    """An inversion constant is required but has not been calibrated."""


class NumericalError(DamekRicciError, RuntimeError):
    """An integrator or quadrature routine failed to converge.

    The offending location is kept in ``context`` so callers can report it.
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class ConfigError(PreconditionError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
