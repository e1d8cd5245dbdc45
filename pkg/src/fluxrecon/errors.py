"""Exception hierarchy.

Everything raised on purpose by the package derives from ``FluxReconError``.
The CLI maps ``ConfigError`` (and input-file problems) to exit status 2 and
every other ``FluxReconError`` to exit status 3.
"""


class FluxReconError(Exception):
    """Base class for all package errors."""


class ConfigError(FluxReconError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


# flux

class InvalidGridError(FluxReconError, ValueError):
    pass


class OutOfDomainError(FluxReconError, ValueError):
    pass


class DomainMismatchError(FluxReconError, ValueError):
    pass


# riemann

class HyperbolicityError(FluxReconError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DomainExitError(FluxReconError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NoLocusPointError(FluxReconError):
    pass


class InadmissibleBranchError(FluxReconError):
    pass


class CompositeWaveError(InadmissibleBranchError):
    """The wave curve changes kind along the branch (needs a composite wave)."""


class NoSolutionError(FluxReconError):
    pass


class ConvergenceError(FluxReconError):
    pass


# profile / reconstruct

class DegenerateObservationError(FluxReconError):
    pass


class InternalConsistencyError(FluxReconError):
    pass


class ObservationInconsistencyError(FluxReconError):
    pass


class StepFailure(FluxReconError):
    """A reconstruction step failed; ``step`` is the grid index h."""

    def __init__(self, step, cause):
        super().__init__(f"step h={step} failed: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause


class InconclusiveMeasurementError(FluxReconError):
    pass


# recorded profiles

class ProfileGapError(FluxReconError):
    def __init__(self, step, message=None):
        super().__init__(message or f"missing profile file for step h={step}")
        self.step = step


class ProfileParseError(FluxReconError, ValueError):
    pass
