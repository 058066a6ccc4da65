"""Exception types shared across the package."""


class MetroSearchError(Exception):
    """Base class for all package errors."""


class DimensionError(MetroSearchError, ValueError):
    """Operands have inconsistent or mismatched dimensions."""


class SizeLimitError(MetroSearchError, ValueError):
    """A Hilbert-space dimension exceeds the configured cap."""


class StateError(MetroSearchError, ValueError):
    """A matrix or vector violates the invariants of a quantum state."""


class ChannelError(MetroSearchError, ValueError):
    """A channel description is not completely positive and trace preserving."""


class ConfigError(MetroSearchError, ValueError):
    """Invalid scheme or experiment configuration.

    ``field`` names the offending key path when one is known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class BoundDomainError(MetroSearchError, ValueError):
    """A closed-form bound was evaluated outside its domain."""


class UnsupportedConfigurationError(MetroSearchError, ValueError):
    """The requested scheme layout is outside what an operation supports."""
