from __future__ import annotations


class BubblePriceError(Exception):
    """Root of every error raised by bubbleprice."""


class PreconditionError(BubblePriceError, ValueError):
    """An input lies outside the domain of the operation."""


class PostconditionError(BubblePriceError, AssertionError):
    """A result violated a guaranteed property; always a library bug."""


class StabilityError(PreconditionError):
    """The explicit part of a theta-scheme violates its stability bound."""


class ConfigError(BubblePriceError):
    """A run configuration failed schema validation or could not be resolved."""
