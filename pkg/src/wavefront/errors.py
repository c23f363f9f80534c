"""Exception types shared by the solver, the model library and the CLI."""


class WavefrontError(Exception):
    """Base class for all package errors."""


class ParameterError(WavefrontError, ValueError):
    """A parameter violates a stated admissibility inequality."""


class InputError(WavefrontError, ValueError):
    """Malformed numeric input (non-finite values, wrong shapes)."""


class ConfigurationError(WavefrontError, ValueError):
    """Grid, window or run configuration is inconsistent."""


class ResolutionError(WavefrontError):
    """Grid spacing too coarse for the kernel exponents."""


class OrderingError(WavefrontError):
    """A profile left the order interval [0, K]."""


class PreconditionError(WavefrontError):
    """Inputs to the iteration do not satisfy its hypotheses."""


class CertificationError(WavefrontError):
    """A candidate upper/lower solution or the monotonicity condition was rejected."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MonotonicityError(WavefrontError):
    """The iteration broke the ordering lower <= phi_n <= phi_{n-1}."""

    def __init__(self, message, step, location, amount, report=None):
        super().__init__(message)
        self.step = step
        self.location = location
        self.amount = amount
        self.report = report


class BudgetError(WavefrontError):
    """No convergence within the step budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SimulationError(WavefrontError):
    """Base for failures of the time-dependent solver."""


class BlowUpError(SimulationError):
    """Solution left the band [-0.1K, 1.1K]."""


class TrackingError(SimulationError):
    """Front crossing could not be located inside the window."""
