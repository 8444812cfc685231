"""Exception hierarchy shared by the integrator modules."""


class EfcmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(EfcmError, ValueError):
    """An argument is outside its documented domain."""


class ExactnessError(EfcmError, ValueError):
    """The quadrature rule is not exact enough for the requested truncation."""


class DegenerateRuleError(EfcmError, ValueError):
    """The quadrature rule makes the step-size bound meaningless."""


class StructureAbsentError(EfcmError, LookupError):
    """A problem lacks the Hamiltonian or quadratic-invariant structure requested."""


class DivergenceError(EfcmError, ArithmeticError):
    """Fixed-point iteration blew up while solving the stage equations."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EvaluationError(EfcmError, ArithmeticError):
    """The nonlinearity returned non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BudgetError(EfcmError, RuntimeError):
    """The reference integrator exceeded its step budget."""
