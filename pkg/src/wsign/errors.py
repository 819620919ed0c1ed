"""Exception types shared across the package."""


class WsignError(Exception):
    """Base class for all package errors."""


class ValidationError(WsignError, ValueError):
    """Input failed a precondition (shape, definiteness, range)."""


class ConvergenceError(WsignError, RuntimeError):
    """An iterative solver hit its iteration cap before meeting tolerance.

    ``best`` holds the last iterate and ``residual`` its convergence measure,
    so callers can inspect or salvage the partial result.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations
