"""Exception taxonomy shared across the package.

CLI exit codes: ConfigError (and subclasses) -> 2, DataError -> 3.
"""


class CentriportError(Exception):
    """Base class for all package errors."""


class ConfigError(CentriportError):
    """Bad configuration: unknown option, malformed flag, missing file."""


class InvalidParameterError(ConfigError):
    """A numeric parameter is outside its admissible range."""


class DataError(CentriportError):
    """Input data cannot support the requested computation."""


class NumericError(CentriportError):
    """A numerical routine failed to converge or hit a singular system."""


class InfeasibleError(NumericError):
    """Optimization constraints admit no feasible point."""
