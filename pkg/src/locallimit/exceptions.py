"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class LocalLimitError(ValueError):
    """Base class for all errors raised by locallimit."""


class DegreeExceeded(LocalLimitError):
    pass


class RadiusExceeded(LocalLimitError):
    pass


class BadRadius(LocalLimitError):
    pass


class ExplosionGuard(LocalLimitError):
    """An enumeration would exceed its configured size cap."""


class ZeroMeanDegree(LocalLimitError):
    pass


class NotATree(LocalLimitError):
    pass


class ParameterMismatch(LocalLimitError):
    pass


class ParseError(LocalLimitError):
    pass


class InvariantViolation(LocalLimitError):
    def __init__(self, message: str, *, depth: int | None = None, ball: str | None = None):
        super().__init__(message)
        self.depth = depth
        self.ball = ball


class InsufficientDepth(LocalLimitError):
    pass


class ValidationRequired(LocalLimitError):
    pass


class InfeasibleRounding(LocalLimitError):
    def __init__(self, message: str, *, best_denominator: int | None = None):
        super().__init__(message)
        self.best_denominator = best_denominator


class OddLoopCell(LocalLimitError):
    pass


class PartitionInfeasible(LocalLimitError):
    pass


class BallTooLarge(LocalLimitError):
    pass


class MaxNExceeded(LocalLimitError):
    def __init__(self, message: str, *, required: int):
        super().__init__(message)
        self.required = required
