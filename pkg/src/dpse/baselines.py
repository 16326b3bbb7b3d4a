"""Comparison estimators: pure-DP peeling with range-proportional noise, and
the folklore non-private top-k baseline.

The peeling estimator clamps every coordinate to [-r_inf, r_inf], then runs k
rounds of noisy argmax over |mean| followed by a noisy release of the winning
coordinate, each at budget eps/(2k).  Its Laplace scale 4 * r_inf * k / (eps*n)
is linear in the a priori range bound r_inf; that linear dependence is exactly
the weakness the experiments expose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .rng import RngHandle, LaplaceParams, derive_stream, sample_laplace

__all__ = ["PeelingParams", "cwz_peeling_estimate", "nonprivate_baseline"]


@dataclass(frozen=True)
class PeelingParams:
    """Sparsity, budget, and the a priori l-infinity bound on the mean."""

    k: int
    epsilon: float
    r_inf: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.r_inf > 0:
            raise ValueError(f"r_inf must be > 0, got {self.r_inf}")


def cwz_peeling_estimate(
    rng: RngHandle, data: Dataset, p: PeelingParams
) -> tuple[np.ndarray, list[int]]:
    """Noisy top-k peeling under pure DP.

    Clamping bounds the per-coordinate mean sensitivity by 2*r_inf/n, so at
    round budget eps/(2k) the selection and release noises both have Laplace
    scale 4*r_inf*k/(eps*n).  Total spend is eps by basic composition.
    """
    clamped = np.clip(data.samples, -p.r_inf, p.r_inf)
    m = clamped.mean(axis=0)
    scale = 4.0 * p.r_inf * p.k / (p.epsilon * data.n)

    estimate = np.zeros(data.d)
    support: list[int] = []
    available = np.ones(data.d, dtype=bool)
    for j in range(p.k):
        round_rng = derive_stream(rng, f"round:{j}")
        select_noise = sample_laplace(
            derive_stream(round_rng, "select"), LaplaceParams(0.0, scale), size=data.d
        )
        noisy = np.abs(m) + select_noise
        noisy[~available] = -np.inf
        i_star = int(np.argmax(noisy))
        available[i_star] = False
        support.append(i_star)
        estimate[i_star] = m[i_star] + sample_laplace(
            derive_stream(round_rng, "release"), LaplaceParams(0.0, scale)
        )
    return estimate, support


def nonprivate_baseline(data: Dataset, k: int) -> tuple[np.ndarray, list[int]]:
    """Top-k coordinates of |empirical mean|, empirical mean on those, 0 elsewhere."""
    if k > data.d:
        raise ValueError(f"k={k} must not exceed d={data.d}")
    m = data.samples.mean(axis=0)
    support = list(np.argsort(-np.abs(m), kind="stable")[:k])
    estimate = np.zeros(data.d)
    estimate[support] = m[support]
    return estimate, [int(i) for i in support]
