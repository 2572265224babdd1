"""Exception hierarchy shared across the package.

Both concrete classes subclass ValueError so callers that do not care
about the distinction can catch the builtin. The CLI maps ConfigError to
exit code 2 (usage) and DataError to exit code 1 (bad input data).
"""


class SeqvecError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SeqvecError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(SeqvecError, ValueError):
    """Malformed, empty, or otherwise unusable input data."""
