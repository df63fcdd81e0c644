"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """A quadrature or iteration failed to reach its tolerance.

    Attributes
    ----------
    partial : float
        Best estimate accumulated before giving up.
    """

    def __init__(self, message: str, partial: float = float("nan")):
        super().__init__(message)
        self.partial = partial


class BlowUpError(RuntimeError):
    """The solver state became non-finite."""

    def __init__(self, message: str, last_time: float, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class StabilityError(RuntimeError):
    """The discrete solution violated the Bochner bound beyond tolerance."""

    def __init__(self, message: str, last_time: float, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class DegenerateStateError(ValueError):
    """A state is too concentrated for a coercivity constant to exist."""


class ResourceGuardError(ValueError):
    """A request would exceed the size limits of a reference routine."""


class ResolutionError(ValueError):
    """The grid does not resolve the requested quantity."""

    def __init__(self, message: str, required_x_max: float | None = None):
        super().__init__(message)
        self.required_x_max = required_x_max


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
