"""Exception types shared across the package."""


class HardyLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(HardyLabError, ValueError):
    """An argument violates a documented precondition."""


class DomainMembershipError(HardyLabError, ValueError):
    """A point lies outside the closed domain it was claimed to belong to."""


class UnsupportedDomainError(HardyLabError, ValueError):
    """The operation is not defined for this domain kind."""


class EvaluationError(HardyLabError, ArithmeticError):
    """An integrand produced a non-finite value.

    Carries the offending quadrature node (if known) in ``node``.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class WeightDomainError(HardyLabError, ValueError):
    """The logarithmic weight is not positive at an evaluation point.

    Signals that the scale R was chosen too small for the domain
    (the log argument dropped to 1 or below).
    """


class CaseDispatchError(HardyLabError, ValueError):
    """Parameters match no case of the critical exponent table."""


class DegenerateInputError(HardyLabError, ValueError):
    """An input is degenerate (e.g. identically zero test function)."""
