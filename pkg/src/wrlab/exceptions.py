"""Exception types raised by wrlab."""


class WRLabError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(WRLabError, ValueError):
    """A volume is too large to enumerate, or too small to be useful."""


class UnsupportedVariantError(WRLabError, ValueError):
    """Operation called with a model variant it does not support."""


class UnrepresentableError(WRLabError, ValueError):
    """An a priori measure has no (lambda, h) coordinates."""


class DegenerateConditioningError(WRLabError, ValueError):
    """A conditional distribution is undefined because every weight vanishes."""


class DivergenceError(WRLabError, ValueError):
    """A series or bound diverges for the given parameters."""
