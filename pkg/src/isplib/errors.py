"""Exception types shared across the library, keyed to CLI exit codes."""


class IspError(Exception):
    """Base class for all library errors."""


class ConfigError(IspError):
    """Invalid configuration or parameter value (CLI exit code 3)."""


class FormatError(IspError):
    """Malformed on-disk data. Carries the offending field for located messages."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{message} (field: {field})"
        super().__init__(message)


class ContainerError(FormatError):
    """Embedded-raw container is present but damaged (bad checksum, truncated)."""


class NumericError(IspError):
    """A numeric procedure failed to produce a usable result (CLI exit code 4)."""
