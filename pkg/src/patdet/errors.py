"""Exception types shared across the package.

Every deliberate failure path raises one of these, so callers (and the CLI
exit-code mapping) can tell bad configuration apart from bad data files.
"""


class PatdetError(Exception):
    """Base class for all errors raised by patdet."""


class ConfigError(PatdetError):
    """Invalid parameter, shape, range, or configuration value."""


class DataFormatError(PatdetError):
    """Malformed, truncated, or otherwise unreadable data file."""
