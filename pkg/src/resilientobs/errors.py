"""Exception types shared across the toolkit."""


class ResilientObsError(Exception):
    """Base class for all toolkit errors."""


class IntegrationDivergedError(ResilientObsError):
    """The truth integrator produced a non-finite state."""


class ObserverDivergedError(ResilientObsError):
    """A partial observer produced a non-finite estimate.

    With the reset rule active this should be unreachable; raising it
    signals a bug, not a bad scenario.
    """


class InvalidSubsetError(ResilientObsError):
    """Sensor index set is empty, unsorted, or out of range."""


class UnsupportedSubsetError(ResilientObsError):
    """No inner left inverse is registered for the requested subset."""


class NumericalFailureError(ResilientObsError):
    """A gain/Lyapunov-type solve did not yield a positive definite result."""


class WindowsUndefinedError(ResilientObsError):
    """Dwell-window constants have no finite solution (some noise floor is zero)."""


class ScenarioInvalidError(ResilientObsError):
    """Attack scenario violates the sparsity/dwell assumptions."""


class ConfigError(ResilientObsError):
    """Malformed or inconsistent run configuration."""
