"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, NumericError -> 3.
"""


class BetaOodError(Exception):
    """Base class for all package errors."""


class ConfigError(BetaOodError):
    """Invalid configuration, flags, or parameter combination."""


class DataError(BetaOodError):
    """Missing, malformed, or degenerate input data."""


class NumericError(BetaOodError):
    """A numeric routine failed to reach its accuracy target."""
