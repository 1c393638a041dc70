"""Exception hierarchy shared by every module."""


class MaxParetoError(Exception):
    """Base class for domain errors raised by this package."""


class ParseError(MaxParetoError):
    pass


class DimensionError(MaxParetoError, ValueError):
    pass


class InstanceRejected(MaxParetoError):
    """The polyhedron of an instance is empty or unbounded."""


class InfeasiblePoint(MaxParetoError):
    pass


class NumericalBreakdown(MaxParetoError):
    """Float simplex lost accuracy; retry in exact rational mode."""


class PreconditionViolated(MaxParetoError):
    pass


class ValidationFailed(MaxParetoError):
    """A result failed its own re-validation. Always a bug."""


class InvalidMatching(MaxParetoError, ValueError):
    pass


class CapExceeded(MaxParetoError):
    pass


class SuiteInvariantError(MaxParetoError):
    pass
