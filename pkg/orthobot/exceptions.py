class OrthobotError(Exception):
    """Base class for every error raised by orthobot."""


class ParameterDomainError(OrthobotError, ValueError):
    pass


class NormalizationError(OrthobotError, ValueError):
    pass


class UnsupportedMeasureError(OrthobotError):
    pass


class NumericalBreakdownError(OrthobotError):
    pass


class InstabilityError(OrthobotError):
    pass


class ConvergenceError(OrthobotError):
    """Raised when an iteration stops without agreeing with itself.

    :param message: Error message
    :param previous: Second to last iterate
    :param current: Last iterate
    """

    def __init__(self, message, previous=None, current=None):
        super().__init__(message)
        self.previous = previous
        self.current = current


class EigensolverError(OrthobotError):
    pass


class InsufficientCoefficientsError(OrthobotError):
    pass


class InvalidEndpointError(OrthobotError, ValueError):
    pass


class TruncationRequiredError(OrthobotError, ValueError):
    pass


class OrderError(OrthobotError, ValueError):
    pass


class ShapeError(OrthobotError, ValueError):
    pass


class BasisIndexError(OrthobotError, IndexError):
    pass


class BlowUpError(OrthobotError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class InfeasibleError(OrthobotError):
    pass


class SolverError(OrthobotError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class SpecError(OrthobotError, ValueError):
    pass
