"""Exception types shared across the package."""


class VprojError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(VprojError):
    """A value, dimension, or parameter violates an operation's contract."""


class FormatError(VprojError):
    """A file could not be parsed or written under the expected format."""
