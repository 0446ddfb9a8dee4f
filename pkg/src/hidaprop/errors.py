"""Exception hierarchy.

``ValidationError`` subclasses mean the inputs violate a domain invariant;
``NumericError`` subclasses mean a computation could not meet its tolerance.
The CLI maps the two families to exit codes 1 and 2.
"""


class HidaPropError(Exception):
    pass


class ValidationError(HidaPropError, ValueError):
    pass


class NumericError(HidaPropError, ArithmeticError):
    pass


class DivergentIntegral(ValidationError):
    pass


class DegenerateQuadratic(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InvalidWindow(ValidationError):
    pass


class FrequencyOutOfRange(ValidationError):
    pass


class InvalidPins(ValidationError):
    pass


class WindowNotContained(ValidationError):
    pass


class InvalidTestFunction(ValidationError):
    pass


class InvalidMeasure(ValidationError):
    pass


class SingularGrid(ValidationError):
    pass


class NotQuadratic(NumericError):
    pass


class QuadratureNotConverged(NumericError):
    pass


class TailNotCertifiable(NumericError):
    pass


class MaxOrderExceeded(NumericError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
