"""Exception hierarchy shared across the package.

Every error raised by this package derives from :class:`PulseloopError` so
callers can catch one base type. The CLI maps subtypes to exit codes
(see ``cli.EXIT_CODES``).
"""

__all__ = [
    "PulseloopError",
    "InvalidParameterError",
    "DegenerateDistributionError",
    "ConfigError",
    "RegimeError",
    "SweepAssertionError",
    "NumericalError",
    "BesselRangeError",
]


class PulseloopError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(PulseloopError, ValueError):
    """A scalar argument violates its documented domain."""


class DegenerateDistributionError(InvalidParameterError):
    """Zero-variance density requested; evaluate at t > 0 instead."""


class ConfigError(PulseloopError):
    """Scenario configuration is malformed or violates an invariant."""


class RegimeError(PulseloopError):
    """A hard validity condition of the dispersion model fails."""


class SweepAssertionError(PulseloopError):
    """An opt-in sweep trend assertion did not hold."""


class NumericalError(PulseloopError):
    """A numerical routine could not reach its accuracy target."""


class BesselRangeError(NumericalError):
    """Argument outside the validated range of the series evaluation."""
