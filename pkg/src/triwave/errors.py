"""Exception types raised by the solvers, scanners and fitters."""


class TriwaveError(Exception):
    """Base class for all package-specific errors."""


class DegenerateSteadyState(TriwaveError):
    """The Liouvillian null space has dimension > 1; no unique steady state."""


class NonConvergent(TriwaveError):
    """A solver result failed its residual / trace / positivity tolerances."""


class StepUnderflow(TriwaveError):
    """The adaptive integrator required a step below machine resolution."""


class NoSplitDetected(TriwaveError):
    """Fewer than two qualifying local maxima found along the requested cut."""


class ModelEvaluationFailed(TriwaveError):
    """A model evaluation inside the fit objective failed at some parameter point."""


class MaxEvaluationsExceeded(TriwaveError):
    """The fit used up its model-evaluation budget before converging.

    The partial result (best point so far) is attached as ``.result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ConfigError(TriwaveError):
    """A configuration file failed schema validation."""
