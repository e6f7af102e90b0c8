"""Exception hierarchy.

Everything raised deliberately by the package derives from ``EchoError``.
``DomainError`` subclasses map to CLI exit code 1, ``ConfigError`` and
``ParseError`` to exit code 2.
"""


class EchoError(Exception):
    pass


class DomainError(EchoError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DimensionError(DomainError):
    pass


class ShapeError(DomainError):
    pass


class NotUnitaryError(DomainError):
    pass


class NormalizationError(DomainError):
    pass


class IncompleteTrainError(DomainError):
    pass


class OrderingError(DomainError):
    pass


class GridTooCoarseError(DomainError):
    pass


class AmplitudeRangeError(DomainError):
    pass


class LayoutInfeasibleError(DomainError):
    pass


class DegenerateSetError(DomainError):
    pass


class ConvergenceError(DomainError):
    """Optimizer did not converge. ``best`` holds the best design found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class WindowError(DomainError):
    pass


class NoSignalError(DomainError):
    pass


class ConfigError(EchoError):
    pass


class ParseError(EchoError):
    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.offset = offset
