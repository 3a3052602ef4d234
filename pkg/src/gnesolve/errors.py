"""Exception hierarchy shared by all solver components."""


class GnesolveError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(GnesolveError):
    """Dimension or shape mismatch in user-supplied data."""


class NumericError(GnesolveError):
    """An oracle or update produced non-finite values."""


class ValidationError(GnesolveError):
    """A parameter or step-size condition failed validation."""


class InexactnessError(GnesolveError):
    """An inner solver could not certify the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class DivergenceError(GnesolveError):
    """An outer iteration produced a non-finite state."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(GnesolveError):
    """An experiment configuration could not be parsed or is inconsistent."""
