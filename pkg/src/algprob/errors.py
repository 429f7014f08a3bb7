"""Exception hierarchy.

Validation problems (bad densities, POVMs, channels, shapes) derive from
:class:`ValidationError`; the CLI maps them to exit code 2. Numerical
failures that should not happen for valid input derive from
:class:`NumericalError` and map to exit code 1.
"""


class AlgProbError(Exception):
    """Base class for all package errors."""


class ValidationError(AlgProbError, ValueError):
    """An input violates a documented invariant."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self), **self.details}


class ShapeError(ValidationError):
    """Dimensions do not match."""


class DomainError(ValidationError):
    """A scalar parameter lies outside its admissible range."""


class NotCPError(ValidationError):
    """A Choi matrix is not positive semidefinite."""


class ZeroProbabilityError(ValidationError):
    """Conditioning on an event of (numerically) zero probability."""


class NumericalError(AlgProbError, ArithmeticError):
    """An algorithm failed to reach its numerical postcondition."""
