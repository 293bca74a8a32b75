"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised for invalid parameters or malformed configuration."""


class TruncationError(ArithmeticError):
    """Raised when the age-of-information series cannot be truncated safely.

    This happens when the success probability is so small (or the source
    mixes so slowly) that the enumeration would exceed the depth cap.
    """
