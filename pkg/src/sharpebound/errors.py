"""Exception types shared across the package."""


class SharpeBoundError(Exception):
    """Base class for all package errors."""


class DomainError(SharpeBoundError, ValueError):
    """An evaluation point violates a domain precondition (e.g. S <= 0)."""


class ConfigurationError(SharpeBoundError, ValueError):
    """Invalid grid, Monte Carlo, or run configuration."""


class EllipticityError(ConfigurationError):
    """The 2-D pricing operator is degenerate (|rho| = 1).

    With perfect correlation the market is complete: use the 1-D solver or
    the closed form with the no-arbitrage coefficient relation instead.
    """


class UnsupportedModelError(SharpeBoundError, ValueError):
    """The requested route does not support this model/payoff combination."""


class SolverError(SharpeBoundError, RuntimeError):
    """Iterative solve failed to converge; carries the last residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
