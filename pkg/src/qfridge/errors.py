"""Exception hierarchy shared by all qfridge modules."""


class QfridgeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QfridgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SymbolicKindError(QfridgeError):
    """Pointwise evaluation was requested for a symbolic (Dirac) density."""


class ConfigError(QfridgeError, ValueError):
    """A configuration is inconsistent or incomplete."""


class UnsupportedDriveError(QfridgeError):
    """The drive protocol is outside what the requested formula supports."""


class OutOfRegimeError(QfridgeError):
    """A closed-form limit was requested outside its validity regime."""


class AccuracyError(QfridgeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class TruncationError(QfridgeError):
    """The Floquet truncation K is too small; carries a suggested K."""

    def __init__(self, message, suggested_k=None):
        super().__init__(message)
        self.suggested_k = suggested_k


class ConditioningError(QfridgeError):
    """A linear solve hit a (near-)singular system."""


class NotConvergedError(QfridgeError):
    """A simulation did not reach its asymptotic regime within the horizon."""


class UndefinedRatioError(QfridgeError):
    """A ratio of integrated rates has a vanishing denominator."""
