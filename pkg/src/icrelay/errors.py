"""Exception types shared across the package."""


class IcRelayError(Exception):
    """Base class for all package errors."""


class InvalidMatrixError(IcRelayError, ValueError):
    """Matrix input is empty or contains non-finite entries."""


class SingularBlockError(IcRelayError):
    """The designated block is numerically singular where an inverse is required."""


class UnsupportedFactorError(IcRelayError, ValueError):
    """Symbol-extension factor other than 2 was requested."""


class ChannelFormatError(IcRelayError, ValueError):
    """A serialized channel or plan could not be parsed; the message names the field."""


class DimensionMismatchError(IcRelayError, ValueError):
    """Matrix dimensions are inconsistent with the declared antenna configuration."""


class NeedsExtensionError(IcRelayError):
    """Stream counts are half-integral; build on the two-slot extended channel instead."""


class DegenerateChannelError(IcRelayError):
    """Required generic rank conditions failed even after resampling completions."""


class PowerHeadroomError(IcRelayError):
    """Transmit power too low to cover the relay's noise-forwarding power."""


class UnstableConfigurationError(IcRelayError):
    """Too many Monte-Carlo trials failed verification to report a slope."""


class UnboundedRegionError(IcRelayError):
    """The inequality list does not bound the region in both coordinates."""
