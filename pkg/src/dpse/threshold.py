"""Linear-time sparse mean estimation: bucketed threshold scores, k rounds of
exponential-mechanism support selection, per-coordinate univariate estimation.

The support stage never reads the range bound R; only the univariate
estimator's histogram extent does, and only logarithmically.  That is the
whole point of the construction: its accuracy is flat in R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import BucketedDataset, Dataset, bucket_means
from .errors import EstimationError
from .kv1d import Kv1dParams, kv1d_estimate
from .mechanisms import PrivacyBudget, ScoredCandidates, exponential_mechanism
from .rng import RngHandle, derive_stream

__all__ = [
    "ThresholdParams",
    "CoordinateScores",
    "coordinate_scores",
    "select_support",
    "threshold_estimate",
]


@dataclass
class ThresholdParams:
    """All knobs of the threshold estimator in one auditable record.

    ``bucket_size`` and ``threshold`` are derived from (k, sigma2, alpha) when
    omitted: b = ceil(15 k sigma^2 / alpha^2) clipped to [1, n/2], and
    T = 3.5 sigma / sqrt(b).  Explicit overrides are allowed so experiments
    can run below theorem-scale n.
    """

    k: int
    epsilon: float
    beta: float
    sigma2: float
    alpha: float
    range_bound: float
    bucket_size: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not (0 < self.beta < 1):
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.range_bound > 0:
            raise ValueError(f"range bound must be > 0, got {self.range_bound}")

    def resolved_bucket_size(self, n: int) -> int:
        if self.bucket_size is not None:
            return self.bucket_size
        b = math.ceil(15.0 * self.k * self.sigma2 / self.alpha**2)
        return int(min(max(b, 1), max(n // 2, 1)))

    def resolved_threshold(self, b: int) -> float:
        if self.threshold is not None:
            return self.threshold
        return 3.5 * math.sqrt(self.sigma2) / math.sqrt(b)


@dataclass
class CoordinateScores:
    """Per-coordinate counts of bucket means beyond the threshold."""

    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=int)


def coordinate_scores(bd: BucketedDataset, threshold: float) -> CoordinateScores:
    """z_i = number of bucket means j with |(m_j)_i| >= threshold.

    The test is two-sided because mean coordinates may be negative; a single
    sample swap changes one bucket mean, hence each z_i by at most 1.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    z = np.sum(np.abs(bd.means) >= threshold, axis=0)
    return CoordinateScores(z=z)


def select_support(
    rng: RngHandle, scores: CoordinateScores, k: int, epsilon_support: float
) -> list[int]:
    """k rounds of the exponential mechanism over unselected coordinates.

    Each round spends epsilon_support / k at score sensitivity 1.  Returns the
    selected coordinates in selection order.
    """
    d = scores.z.size
    if k > d:
        raise ValueError(f"k={k} must not exceed dimension {d}")
    round_budget = PrivacyBudget(epsilon_support / k)
    selected: list[int] = []
    remaining = list(range(d))
    for j in range(k):
        sc = ScoredCandidates(
            candidates=remaining,
            scores=scores.z[remaining].astype(float),
            sensitivity=1.0,
        )
        pick = exponential_mechanism(derive_stream(rng, f"round:{j}"), sc, round_budget)
        selected.append(pick)
        remaining.remove(pick)
    return selected


def threshold_estimate(
    rng: RngHandle, data: Dataset, p: ThresholdParams
) -> tuple[np.ndarray, list[int], PrivacyBudget]:
    """Full pipeline: bucket, score, select support (eps/2), estimate (eps/2).

    Each selected coordinate gets a univariate estimate at budget
    (eps/2) / k on its bucketed values; unselected coordinates are 0.  Total
    spend is exactly eps by basic composition.
    """
    b = p.resolved_bucket_size(data.n)
    if data.n < 2 * b:
        raise ValueError(f"need n >= 2b (n={data.n}, b={b})")
    threshold = p.resolved_threshold(b)

    bd = bucket_means(data, b)
    scores = coordinate_scores(bd, threshold)

    spent = 0.0
    eps_support = p.epsilon / 2.0
    try:
        support = select_support(
            derive_stream(rng, "support"), scores, p.k, eps_support
        )
        spent += eps_support
        estimate = np.zeros(data.d)
        eps_coord = (p.epsilon / 2.0) / p.k
        kv_params = Kv1dParams(
            epsilon=eps_coord,
            sigma=math.sqrt(p.sigma2 / b),
            range_bound=p.range_bound,
            beta=p.beta,
        )
        for i in support:
            estimate[i] = kv1d_estimate(
                derive_stream(rng, f"kv1d:{i}"), bd.means[:, i], kv_params
            )
            spent += eps_coord
    except Exception as exc:
        if isinstance(exc, EstimationError):
            raise
        raise EstimationError(str(exc), budget_spent=spent) from exc
    return estimate, support, PrivacyBudget(p.epsilon)
