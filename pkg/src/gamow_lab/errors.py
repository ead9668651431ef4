"""Exception hierarchy shared by all gamow_lab modules."""


class GamowLabError(Exception):
    """Base class for every error raised by gamow_lab."""


class PoleEvaluationError(GamowLabError, ZeroDivisionError):
    """A rational function or amplitude was evaluated exactly at a pole."""


class SeriesDomainError(GamowLabError, ValueError):
    """The truncated-norm series was requested outside its radius of convergence."""


class PreconditionError(GamowLabError, ValueError):
    """Inputs violate a documented precondition."""


class RealPoleError(PreconditionError):
    """Residue calculus needs every pole off the real axis."""


class DegeneratePoleError(PreconditionError):
    """A resonance pole has order > 1."""


class NonDecayingIntegrandError(GamowLabError, ValueError):
    """The integrand does not decay fast enough for the requested transform."""


class ToleranceNotMetError(GamowLabError, ArithmeticError):
    """Quadrature could not reach the requested tolerance.

    The best available value and its error estimate are kept on the exception
    so callers can decide whether to use them anyway.
    """

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class WindowTooEarlyError(PreconditionError):
    """The requested time window is still dominated by exponential decay."""


class NoCrossoverError(GamowLabError, ArithmeticError):
    """No crossover between exponential and power-law branches was found."""


class NoPeakError(PreconditionError):
    """The energy grid does not bracket a resonance peak."""


class NonConvergenceError(GamowLabError, ArithmeticError):
    """An iterative fit did not converge."""


class NonTimelikeError(PreconditionError):
    """A four-velocity is not a future-pointing unit timelike vector."""


class RotationCheckError(GamowLabError, ArithmeticError):
    """A computed Wigner rotation does not fix the rest-frame time axis."""
