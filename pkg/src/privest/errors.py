"""Exception types raised across the package."""


class PrivestError(Exception):
    """Base class for all library errors."""


class UnsupportedPair(PrivestError, TypeError):
    pass


class BetaNegative(PrivestError, ValueError):
    pass


class TooLarge(PrivestError, ValueError):
    pass


class GridTooCoarse(PrivestError, ValueError):
    pass


class NonDifferentiable(PrivestError, ValueError):
    pass


class NoSignChange(PrivestError, ValueError):
    pass


class DegenerateDerivative(PrivestError, ValueError):
    pass


class Unbounded(PrivestError, RuntimeError):
    pass


class EpsTooLarge(PrivestError, ValueError):
    pass


class EtaOutOfRange(PrivestError, ValueError):
    pass


class AlphaOutOfRange(PrivestError, ValueError):
    pass


class NotNeighbors(PrivestError, ValueError):
    pass


class ParseError(PrivestError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PrivestError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
