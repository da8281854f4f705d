"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class GraphQuantError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(GraphQuantError):
    """Invalid configuration: bad parameter values, inconsistent specs."""


class DataError(GraphQuantError):
    """Invalid input data: parse failures, validation failures on files."""
