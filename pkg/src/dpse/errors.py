"""Exception types shared across the estimators."""

from __future__ import annotations


class ScaleError(RuntimeError):
    """Raised when an exponential-time stage would exceed its desk-scale guard."""


class EstimationError(RuntimeError):
    """A pipeline failure that carries the privacy budget already spent."""

    def __init__(self, message: str, budget_spent: float = 0.0):
        super().__init__(message)
        self.budget_spent = budget_spent
