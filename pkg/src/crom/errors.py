"""Exception types shared across the codec."""


class ConfigurationError(ValueError):
    """Invalid codec or experiment parameters."""


class FormatError(ValueError):
    """Malformed, corrupt or truncated ``.crom`` stream."""
