"""Finite-dimensional quantum probability: states, measurements, channels,
qubit algorithms, interacting Fock spaces, algebra structure and the
Kochen-Specker configuration.
"""
from . import channels, contextuality, fock, matcore, measure, qpu, states, structure
from .errors import (
    AlgProbError, DomainError, NotCPError, NumericalError, ShapeError, ValidationError,
    ZeroProbabilityError,
)

__version__ = "0.1.0"

__all__ = [
    "channels", "contextuality", "fock", "matcore", "measure", "qpu", "states", "structure",
    "AlgProbError", "DomainError", "NotCPError", "NumericalError", "ShapeError",
    "ValidationError", "ZeroProbabilityError", "__version__",
]
