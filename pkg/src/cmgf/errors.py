"""Exception hierarchy shared by every module in the package."""


class CmgfError(Exception):
    """Base class for all package errors."""


class ParameterError(CmgfError, ValueError):
    """Model or configuration parameters violate their constraints."""


class DomainError(CmgfError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class ConvergenceError(CmgfError, RuntimeError):
    """Numerical integration or iteration failed to reach its tolerance.

    The partial value and the error estimate reached so far are kept on the
    exception so callers can decide whether they are usable.
    """

    def __init__(self, message, value=None, err_estimate=None):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


class IntegrandError(CmgfError, ArithmeticError):
    """The integrand produced a non-finite value."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class RootError(CmgfError, RuntimeError):
    """Root bracketing or refinement failed."""


class ComputationError(CmgfError, ArithmeticError):
    """A derived quantity is numerically degenerate (e.g. zero variance)."""
