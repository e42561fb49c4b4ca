"""Exception hierarchy shared by the toolkit.

The command line maps :class:`ConfigError` to exit status 2 and
:class:`NumericalError` to exit status 3.
"""


class MnaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MnaError, ValueError):
    """Invalid user input: bad configuration, parameters or domain."""


class NumericalError(MnaError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""
