"""Exception and warning types shared across the package."""


class GemsimError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GemsimError, ValueError):
    """A physical or grid parameter is out of its valid range."""


class StabilityError(GemsimError):
    """The requested time step violates the integrator stability bound."""


class NumericalError(GemsimError):
    """The integration produced non-finite values.

    Carries the time and z-index where the problem was first detected.
    """

    def __init__(self, message, t=None, z_index=None):
        super().__init__(message)
        self.t = t
        self.z_index = z_index


class UndefinedMetricError(GemsimError):
    """A metric is undefined for the given data (e.g. zero input energy)."""


class PoleError(GemsimError, ValueError):
    """Gamma function evaluated at a nonpositive integer."""


class ConfigError(GemsimError):
    """A run configuration could not be parsed or resolved."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class OracleValidityWarning(UserWarning):
    """A closed-form result was requested outside its validity regime."""
