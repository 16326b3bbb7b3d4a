"""Univariate private mean estimation via a two-stage histogram + clamp scheme.

Stage 1 locates the data on a sigma-width grid with a noisy-argmax private
histogram; stage 2 clamps to a 4*sigma window around the located bin and
releases the clamped mean with Laplace noise.  The a priori range bound R
enters only through the histogram extent, which is what keeps the sample cost
logarithmic (not linear) in R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngHandle, LaplaceParams, derive_stream, sample_laplace

__all__ = ["Kv1dParams", "kv1d_estimate"]


@dataclass(frozen=True)
class Kv1dParams:
    """Knobs of the univariate estimator: budget, known sd, range, failure prob."""

    epsilon: float
    sigma: float
    range_bound: float
    beta: float = 0.1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not self.range_bound > 0:
            raise ValueError(f"range bound must be > 0, got {self.range_bound}")
        if not (0 < self.beta < 1):
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")


def kv1d_estimate(rng: RngHandle, values, p: Kv1dParams) -> float:
    """Epsilon-DP estimate of the mean of ``values``.

    Stage 1 (budget eps/2): histogram on half-open bins [j*sigma, (j+1)*sigma)
    covering [-R - sigma, R + sigma]; each count gets Laplace(4/eps) noise
    (one value moving changes two counts, so l1 sensitivity 2 at budget eps/2
    means scale 2 / (eps/2)); the noisy argmax bin, ties toward the smaller
    index, gives a center c.  Stage 2 (budget eps/2): clamp values to
    [c - 4*sigma, c + 4*sigma] and release the clamped mean plus
    Laplace(16*sigma / (eps*n)) (clamped-mean sensitivity 8*sigma/n).
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError(f"need at least 2 values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    n = values.size
    sigma, r = p.sigma, p.range_bound

    # Stage 1: private histogram on the sigma grid.
    j_lo = math.floor((-r - sigma) / sigma)
    j_hi = math.ceil((r + sigma) / sigma) - 1
    n_bins = j_hi - j_lo + 1
    idx = np.clip(np.floor(values / sigma).astype(np.int64) - j_lo, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    hist_rng = derive_stream(rng, "histogram")
    noise = sample_laplace(hist_rng, LaplaceParams(0.0, 4.0 / p.epsilon), size=n_bins)
    best = int(np.argmax(counts + noise))  # np.argmax takes the smallest index on ties
    c = (j_lo + best + 0.5) * sigma

    # Stage 2: clamp and release.
    lo, hi = c - 4.0 * sigma, c + 4.0 * sigma
    clamped_mean = float(np.mean(np.clip(values, lo, hi)))
    mean_rng = derive_stream(rng, "mean")
    scale = 16.0 * sigma / (p.epsilon * n)
    return clamped_mean + sample_laplace(mean_rng, LaplaceParams(0.0, scale))
