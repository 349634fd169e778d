"""Exception types raised by the simulator."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical routine."""


class QuadratureError(NumericalError):
    def __init__(self, message, abserr=None):
        super().__init__(message if abserr is None else f"{message} (error estimate {abserr:.3e})")
        self.abserr = abserr


class SingularEndpointError(ValueError):
    """Principal-value integral requested exactly at an edge of the support."""


class DomainError(ValueError):
    """Argument outside the domain where the quantity is defined."""


class SolverInstabilityError(NumericalError):
    def __init__(self, index, t, value, bound):
        super().__init__(
            f"|u| = {value:.6g} exceeds 1 + {bound - 1:.3g} at sample {index} (t = {t:.6g})"
        )
        self.index = index
        self.t = t
        self.value = value
        self.bound = bound


class CoefficientSingularityError(NumericalError):
    """u(t) vanishes on the grid so u'/u is undefined."""
