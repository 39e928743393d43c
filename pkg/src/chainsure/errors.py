"""Exception types shared across the package."""


class ChainsureError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ChainsureError):
    """A config value is out of range or mutually inconsistent."""


class ContractionViolation(ChainsureError):
    """The externality feedback is too strong: alpha * rho(G) >= 1."""

    def __init__(self, alpha_rho: float):
        self.alpha_rho = alpha_rho
        super().__init__(
            f"externality spectral condition violated: alpha * rho(G) = {alpha_rho:.6g} >= 1"
        )


class ConvergenceError(ChainsureError):
    """An iterative solver hit its iteration cap.

    Carries the last iterate and the residual at that point so callers can
    inspect how close the solve got.
    """

    def __init__(self, message: str, last_iterate=None, residual: float | None = None):
        self.last_iterate = last_iterate
        self.residual = residual
        if residual is not None:
            message = f"{message} (final residual {residual:.3e})"
        super().__init__(message)


class UniquenessViolation(ChainsureError):
    """Partition enumeration found zero or multiple consistent demand solutions."""
