"""Semantic exceptions shared across the package."""


class SlateoptError(Exception):
    """Base class for all package-specific errors."""


class BudgetExceededError(SlateoptError):
    """An enumeration or sampling budget would be exceeded."""


class NoClosedFormError(SlateoptError):
    """No closed-form expression exists for the requested model."""


class HypothesisViolated(SlateoptError):
    """A limit prediction was requested outside its preconditions."""


class UnidentifiableError(SlateoptError):
    """The requested fit has no unique answer."""


class CoverageError(SlateoptError):
    """A lookup fell outside the range a precomputed table covers."""


class CrossCheckError(SlateoptError):
    """Independent solvers disagreed beyond tolerance."""


class ConfigError(SlateoptError):
    """An experiment configuration is invalid."""
