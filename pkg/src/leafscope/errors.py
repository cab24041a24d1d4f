from __future__ import annotations

from typing import Sequence


class LeafscopeError(Exception):
    """Base class for everything this package raises on purpose."""


class ThetaTruncationError(LeafscopeError, ValueError):
    pass


class NotADivisorPairError(LeafscopeError, ValueError):
    pass


class PreconditionError(LeafscopeError, ValueError):
    pass


class NumericFailure(LeafscopeError, RuntimeError):
    """A numerical stage could not meet its tolerance.

    `residual` and `spectrum` are kept so the CLI can dump them.
    """

    def __init__(
        self,
        message: str,
        residual: float | None = None,
        spectrum: Sequence[float] | None = None,
    ) -> None:
        super().__init__(message)
        self.residual = residual
        self.spectrum = [float(s) for s in spectrum] if spectrum is not None else None


class SectionZerosError(NumericFailure):
    pass


class RejectionBudgetExceeded(LeafscopeError, RuntimeError):
    pass


class CacheError(LeafscopeError, RuntimeError):
    pass
