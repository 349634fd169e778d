"""Exact non-Markovian amplitude damping and its effect on teleportation fidelity."""
from .errors import (CoefficientSingularityError, DomainError, NumericalError, QuadratureError,
                     SingularEndpointError, SolverInstabilityError)
from .spectral import OhmicFamily, Semicircle, Tabulated

__version__ = "0.1.0"

__all__ = [
    "CoefficientSingularityError", "DomainError", "NumericalError", "QuadratureError",
    "SingularEndpointError", "SolverInstabilityError", "OhmicFamily", "Semicircle", "Tabulated",
]
