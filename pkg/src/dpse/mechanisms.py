"""Core DP primitives and the automatic-robustness bound calculators.

Contains the Laplace and exponential mechanisms, basic composition with an
overspend-rejecting budget ledger, the pure/approximate-DP robustness
calculator (tolerable corruption fraction and the group-privacy failure
bound), and the zCDP-to-approximate-DP conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import RngHandle, LaplaceParams, sample_laplace

__all__ = [
    "PrivacyBudget",
    "ScoredCandidates",
    "RobustnessBound",
    "laplace_mechanism",
    "exponential_mechanism",
    "softmax_probabilities",
    "compose",
    "meta_theorem_eta",
    "meta_theorem_failure_bound",
    "zcdp_to_approx",
]


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) budget, optionally carrying a zCDP rho.

    ``split`` hands out child budgets and rejects overspending at
    construction time, so a mechanism cannot silently exceed its parent
    budget.
    """

    epsilon: float
    delta: float = 0.0
    rho: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not (0 <= self.delta < 1):
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")
        if self.rho is not None and not self.rho > 0:
            raise ValueError(f"rho must be > 0 when given, got {self.rho}")

    def split(self, fractions: Sequence[float]) -> list["PrivacyBudget"]:
        """Split into child budgets; fractions must sum to at most 1."""
        fracs = [float(f) for f in fractions]
        if any(f <= 0 for f in fracs):
            raise ValueError("split fractions must be positive")
        if sum(fracs) > 1 + 1e-12:
            raise ValueError(
                f"budget overspend: fractions sum to {sum(fracs)} > 1"
            )
        return [
            PrivacyBudget(self.epsilon * f, self.delta * f) for f in fracs
        ]

    def split_even(self, k: int) -> list["PrivacyBudget"]:
        return self.split([1.0 / k] * k)


@dataclass
class ScoredCandidates:
    """A finite candidate set with scores and a declared score sensitivity."""

    candidates: list
    scores: np.ndarray
    sensitivity: float

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if len(self.candidates) < 1:
            raise ValueError("candidate list must be nonempty")
        if len(self.candidates) != len(self.scores):
            raise ValueError("candidates and scores must have equal length")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")
        if not self.sensitivity > 0:
            raise ValueError(f"sensitivity must be > 0, got {self.sensitivity}")


@dataclass(frozen=True)
class RobustnessBound:
    """Tolerable corruption fraction and the matching failure-probability bound."""

    eta: float
    failure_bound: float


def laplace_mechanism(
    rng: RngHandle,
    f_value: np.ndarray | float,
    l1_sensitivity: float,
    budget: PrivacyBudget,
) -> np.ndarray:
    """Release ``f_value`` + i.i.d. Laplace(0, l1_sensitivity / epsilon) noise.

    The sensitivity is a caller contract: the result is epsilon-DP for any f
    whose l1 sensitivity is at most ``l1_sensitivity``.  Pure-DP only
    (``budget.delta`` must be 0).
    """
    if not l1_sensitivity > 0:
        raise ValueError(f"l1 sensitivity must be > 0, got {l1_sensitivity}")
    if budget.delta != 0:
        raise ValueError("laplace_mechanism is a pure-DP primitive (delta must be 0)")
    f_value = np.atleast_1d(np.asarray(f_value, dtype=float))
    scale = l1_sensitivity / budget.epsilon
    noise = sample_laplace(rng, LaplaceParams(0.0, scale), size=f_value.size)
    return f_value + noise.reshape(f_value.shape)


def softmax_probabilities(sc: ScoredCandidates, epsilon: float) -> np.ndarray:
    """Exact output distribution of the exponential mechanism (max-shifted)."""
    logits = (epsilon / (2.0 * sc.sensitivity)) * sc.scores
    logits = logits - np.max(logits)
    w = np.exp(logits)
    return w / w.sum()


def exponential_mechanism(rng: RngHandle, sc: ScoredCandidates, budget: PrivacyBudget):
    """Sample a candidate with probability proportional to exp(eps*score/(2*sens)).

    Sampling goes through the exact cumulative distribution after a max-shift;
    ties at cumulative boundaries resolve toward the earlier candidate, so the
    mechanism is reproducible given the handle.
    """
    p = softmax_probabilities(sc, budget.epsilon)
    u = rng.generator.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    idx = min(idx, len(sc.candidates) - 1)
    return sc.candidates[idx]


def compose(budgets: Sequence[PrivacyBudget]) -> PrivacyBudget:
    """Basic composition: epsilons and deltas add."""
    eps = sum(b.epsilon for b in budgets)
    delta = sum(b.delta for b in budgets)
    rhos = [b.rho for b in budgets]
    rho = sum(rhos) if all(r is not None for r in rhos) else None
    return PrivacyBudget(eps, delta, rho)


def meta_theorem_eta(
    beta: float, epsilon: float, delta: float, n: int
) -> RobustnessBound:
    """Tolerable corruption fraction of an (eps, delta)-DP mechanism.

    A mechanism that succeeds with probability 1-beta tolerates corruption of
    an eta fraction of its n inputs, with

        eta = min( log(1/beta) / (eps*n), log(1/delta) / (eps*n + log n) ),

    the O(.) constant fixed to 1 by convention and the second term dropped
    when delta = 0.  The returned ``failure_bound`` is the group-privacy
    failure bound evaluated at t = floor(eta * n) corrupted samples.
    """
    if not (0 < beta < 1):
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not (0 <= delta < 1):
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eta = math.log(1.0 / beta) / (epsilon * n)
    if delta > 0:
        eta = min(eta, math.log(1.0 / delta) / (epsilon * n + math.log(n)))
    eta = min(eta, 1.0)
    t = math.floor(eta * n)
    return RobustnessBound(eta=eta, failure_bound=meta_theorem_failure_bound(beta, epsilon, delta, t))


def meta_theorem_failure_bound(
    beta: float, epsilon: float, delta: float, corrupted_count: int
) -> float:
    """Group-privacy failure bound min(1, e^(eps*t) * (beta + t*delta))."""
    if corrupted_count < 0:
        raise ValueError(f"corrupted_count must be >= 0, got {corrupted_count}")
    t = corrupted_count
    return min(1.0, math.exp(epsilon * t) * (beta + t * delta))


def zcdp_to_approx(rho: float, delta: float) -> PrivacyBudget:
    """Convert rho-zCDP to (eps, delta)-DP: eps = rho + 2*sqrt(rho*log(1/delta))."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if not (0 < delta < 1):
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    eps = rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))
    return PrivacyBudget(eps, delta, rho=rho)
