"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment or problem configuration."""


class DimensionError(ValueError):
    """Array shapes do not agree."""


class StepSizeError(FloatingPointError):
    """An explicit step produced non-finite values."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SaturationError(OverflowError):
    """A closed-form evaluation would overflow or the potential scale underflowed."""
