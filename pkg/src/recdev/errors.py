"""Exception hierarchy shared across the package.

Law-validation failures all derive from :class:`LawValidationError` so the
CLI can map them to a single exit code; numeric-domain violations derive
from :class:`DomainError`.
"""


class RecdevError(Exception):
    """Base class for all package-specific errors."""


class LawValidationError(RecdevError, ValueError):
    """A step-law description failed validation."""


class NotNormalizedError(LawValidationError):
    """Probabilities are negative or do not sum to one."""


class NotCriticalError(LawValidationError):
    """The law has nonzero drift (pgf derivative at 1 differs from 1)."""


class DegenerateP0Error(LawValidationError):
    """The zero step has probability one; the walk never moves."""


class ZeroQError(LawValidationError):
    """The unit jump toward the skip-free side has probability zero."""


class BadStableParamsError(LawValidationError):
    """gamma or beta of the stable family lie outside (0, 1)."""


class UnknownNameError(LawValidationError):
    """No builtin law with the requested name."""


class DomainError(RecdevError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class SingularDerivativeError(DomainError):
    """The requested derivative diverges at the evaluation point."""


class BadConstantTermError(RecdevError, ValueError):
    """A series operation requires a specific constant term."""


class HorizonTooLargeError(RecdevError, ValueError):
    """The requested horizon exceeds the exact-computation cap."""


class NoClosedFormError(RecdevError):
    """No closed-form scaling parameters exist for this law."""


class FitFailedError(RecdevError):
    """The regular-variation regression did not reach the required R^2."""
