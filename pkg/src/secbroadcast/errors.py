"""Exception hierarchy shared by every module."""


class SecBroadcastError(Exception):
    """Base class for all package errors."""


class DomainError(SecBroadcastError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedFieldError(DomainError):
    """The requested field order cannot host the construction."""


class DegenerateChannelError(DomainError):
    """Erasure probabilities at 0 or 1 where the formulas need the open interval."""


class EnumerationBudgetError(SecBroadcastError):
    """An exact enumeration would exceed its configured size budget."""

    def __init__(self, size, budget):
        super().__init__(f"enumeration size {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


class ConfigError(SecBroadcastError, ValueError):
    """An experiment configuration failed validation."""
