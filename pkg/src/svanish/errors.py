"""Exception types shared across the package."""


class SvanishError(Exception):
    """Base class for every error raised by svanish."""


class DomainError(SvanishError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(SvanishError, ValueError):
    """A requested size exceeds a configured capacity (e.g. Bessel order)."""


class SingularError(SvanishError, ArithmeticError):
    """Division by a (numerically) vanishing quantity.

    ``magnitude`` carries the offending value so callers can report it.
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class ValidityError(SvanishError, RuntimeError):
    """Truncated series arithmetic fell short of the requested validity.

    This indicates a bookkeeping bug, never a user error.
    """


class NumericalError(SvanishError, RuntimeError):
    """Non-finite values or a failed numerical safeguard."""


class SchemaError(SvanishError, ValueError):
    """A serialized document does not match its schema."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
