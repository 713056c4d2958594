"""Exception hierarchy shared by every module."""

from __future__ import annotations


class KPrabhakarError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KPrabhakarError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(KPrabhakarError, ArithmeticError):
    """A series failed to converge within its term cap.

    The partial sum and the number of terms accumulated are kept so callers
    can inspect how far the evaluation got.
    """

    def __init__(self, message: str, partial_value: float, terms_used: int):
        super().__init__(message)
        self.partial_value = partial_value
        self.terms_used = terms_used


class GammaOverflowError(KPrabhakarError, OverflowError):
    """Exponentiating a log-gamma value overflowed double precision."""

    def __init__(self, message: str, log_value: float):
        super().__init__(message)
        self.log_value = log_value
