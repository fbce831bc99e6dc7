"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, guard/model
violations -> 3, I/O problems -> 4.
"""


class SbcPmuError(Exception):
    """Base class for all package errors."""


class ScheduleGuardError(SbcPmuError):
    """Pulse-count approximation guard |R-1|*N_s < 1 violated."""


class ModelParameterError(SbcPmuError):
    """An error-block model was built with an infeasible parameter set."""


class EstimationError(SbcPmuError):
    """A waveform cannot support the requested phasor estimate."""


class ConfigError(SbcPmuError):
    """Scenario/profile configuration is malformed or inconsistent."""
