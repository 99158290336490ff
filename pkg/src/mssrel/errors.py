"""Exception hierarchy shared by every estimator."""


class MssError(Exception):
    """Base class for all errors raised by this package."""


class ParameterDomainError(MssError, ValueError):
    """A parameter lies outside its admissible domain."""


class SupportViolationError(MssError, ValueError):
    """A scale value is incompatible with the observed records."""


class InsufficientRecordsError(MssError, ValueError):
    """Fewer than two upper records are available."""


class CapacityError(MssError, ValueError):
    """The system size exceeds what exact binomial sums support."""


class NumericalError(MssError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy value."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ApproximationBreakdownError(NumericalError):
    """The Lindley expansion left the range where it can be inverted."""


class DegenerateDistributionError(NumericalError):
    """A bootstrap distribution has zero spread."""
