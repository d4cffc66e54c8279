"""Exception hierarchy."""


class WronskianError(Exception):
    """Base class for all errors raised by this package."""


class InputError(WronskianError, ValueError):
    """Arguments violate a documented precondition."""


class IntegrationError(WronskianError, ArithmeticError):
    """A quadrature did not reach the requested tolerance.

    ``estimate`` and ``error`` carry the best value found and its error bound.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularIntegrandError(WronskianError, ArithmeticError):
    """An integrand such as 1/y1**2 is singular inside the range."""


class DegenerateError(WronskianError, ArithmeticError):
    """A normalizing quantity (leading coefficient, overlap) vanished."""


class NumericRangeError(WronskianError, OverflowError):
    """Overflow or underflow that the log-shifted evaluation could not avoid."""


class SolverError(WronskianError, RuntimeError):
    """An eigenvalue or optimization routine broke down."""


class BracketError(SolverError):
    """No sign change / minimum was found in the supplied bracket."""
