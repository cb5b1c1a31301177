"""Exception types shared across the package."""


class UdnError(Exception):
    """Base class for every error raised by this package."""


class DataError(UdnError):
    """Invalid input data: non-finite entries, bad shapes, bad parameters."""


class NumericalError(UdnError):
    """An iterative numerical routine failed or produced unusable output."""


class ConfigError(UdnError):
    """Invalid experiment or command-line configuration."""
