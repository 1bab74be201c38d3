"""Exception types raised across the package."""


class HybridQBError(Exception):
    """Base class for every error raised by hybridqb."""


class NotHermitian(HybridQBError, ValueError):
    pass


class NoConvergence(HybridQBError, ArithmeticError):
    pass


class WrongDimension(HybridQBError, ValueError):
    pass


class DegenerateEta(HybridQBError, ArithmeticError):
    """A closed-form expression would divide by a vanishing eta; use the numeric backend."""


class UnsupportedCombination(HybridQBError, ValueError):
    pass


class MissingHamiltonian(HybridQBError, ValueError):
    pass


class NonUniformGrid(HybridQBError, ValueError):
    pass


class AnalyticUnavailable(HybridQBError, ValueError):
    pass


class UnknownPreset(HybridQBError, KeyError):
    pass


class InvariantViolation(HybridQBError, ArithmeticError):
    """A numerical invariant (trace, positivity, bounds, ...) failed a post-hoc audit."""


class RunError(HybridQBError):
    """A scenario point failed; carries the sweep value and time of the failure."""

    def __init__(self, message: str, sweep_value=None, t=None):
        super().__init__(message)
        self.sweep_value = sweep_value
        self.t = t
