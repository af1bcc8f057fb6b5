"""Exception types raised across the package."""


class BayesLoadError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(BayesLoadError, ValueError):
    """A distribution or model parameter is outside its valid domain."""


class DegenerateDataError(BayesLoadError, ValueError):
    """Data carry no information about (some of) the unknowns."""


class ConvergenceError(BayesLoadError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, mismatch=float("nan"), iterations=0):
        super().__init__(message)
        self.mismatch = mismatch
        self.iterations = iterations


class IntegrationError(BayesLoadError, RuntimeError):
    """ODE integration produced a non-finite state."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class FilterDivergenceError(BayesLoadError, RuntimeError):
    """Kalman filter covariance lost positive definiteness."""


class InsufficientSamplesError(BayesLoadError, ValueError):
    """Too few retained chain samples for the requested statistic."""
