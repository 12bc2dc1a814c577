"""Exception hierarchy shared across the package."""


class QuasimeasError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QuasimeasError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateObservableError(DomainError):
    """Observable with omega_rate = 0: eigenbasis direction undefined."""


class ChartSingularityError(DomainError):
    """The Theta-chart for the driving direction divides by sin(alpha)."""


class InadmissibleConfigError(DomainError):
    """(alpha, theta, Theta) outside the admissibility tetrahedron."""


class DegenerateBranchError(DomainError):
    """Conditioning on an outcome branch of probability zero."""


class NoCrossingError(DomainError):
    """Potential never reaches the requested level."""


class OverflowRangeError(DomainError):
    """Raw hyperbolic evaluation requested outside floating-point range."""


class GridMismatchError(DomainError):
    """Two trajectories expected on a shared grid have different grids."""


class ConfigError(QuasimeasError, ValueError):
    """Malformed or invalid scenario configuration (CLI exit code 2)."""


class IntegrationError(QuasimeasError):
    """Adaptive integration failed (step underflow or step budget exhausted).

    Carries the partial trajectory accumulated before the failure, when
    available, in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
