from typing import Any, Dict, Optional


class MulrepError(Exception):
    """Base class for all errors raised by the toolkit."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})


class FormParseError(MulrepError, ValueError):
    """Form or matrix text does not follow the grammar."""


class DimensionError(MulrepError, ValueError):
    """Vector length or matrix shape does not match."""


class PreconditionError(MulrepError, ValueError):
    """A solver was called on an input outside its hypotheses."""


class UnrepresentableError(MulrepError):
    """The target is definitively not represented (gcd, Heger, certificate)."""


class BudgetExceededError(MulrepError):
    """An enumeration would exceed the configured budget."""


class SearchExhaustedError(MulrepError):
    """A bounded search finished without a solution; the outcome is unknown."""


class ConfigurationError(MulrepError, ValueError):
    """Malformed setting in the environment."""


class VerificationError(MulrepError, AssertionError):
    """An exact self-check failed. Always an internal bug."""
