"""Datasets, synthetic sparse-Gaussian generation, contamination adversaries,
bucketed means, sparsification, and the support-mass metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngHandle, derive_stream

__all__ = [
    "Dataset",
    "GroundTruth",
    "ContaminationSpec",
    "BucketedDataset",
    "CONTAMINATION_STRATEGIES",
    "generate_sparse_gaussian",
    "contaminate",
    "bucket_means",
    "sparsify",
    "support_mass_fraction",
]

CONTAMINATION_STRATEGIES = ("shift_cluster", "sign_flip_support", "heavy_outlier")


@dataclass
class Dataset:
    """An ordered collection of n real d-vectors; one row = one individual.

    Order is significant: privacy neighbors swap a single row.
    """

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise ValueError("samples must be a 2-D (n, d) array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def save_csv(self, path) -> None:
        """One sample per row, d columns, no header, 17 significant digits."""
        np.savetxt(path, self.samples, delimiter=",", fmt="%.17g", newline="\n")

    @classmethod
    def load_csv(cls, path) -> "Dataset":
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(arr)


@dataclass
class GroundTruth:
    """The k-sparse mean behind a synthetic dataset."""

    mu: np.ndarray
    k: int
    sigma2: float
    support: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.support = np.asarray(self.support, dtype=int)
        if len(self.support) > self.k:
            raise ValueError("support larger than sparsity k")
        off = np.setdiff1d(np.arange(self.mu.size), self.support)
        if off.size and np.any(self.mu[off] != 0):
            raise ValueError("mu must be zero off the declared support")


@dataclass(frozen=True)
class ContaminationSpec:
    """How an adversary replaces floor(eta * n) samples."""

    eta: float
    strategy: str
    magnitude: float = 10.0

    def __post_init__(self):
        if not (0 <= self.eta < 1):
            raise ValueError(f"eta must be in [0, 1), got {self.eta}")
        if self.strategy not in CONTAMINATION_STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; "
                f"choose one of {CONTAMINATION_STRATEGIES}"
            )


@dataclass
class BucketedDataset:
    """Means of disjoint size-b blocks; leftover samples are discarded."""

    means: np.ndarray
    b: int

    @property
    def n_buckets(self) -> int:
        return self.means.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def restrict(self, coords) -> "BucketedDataset":
        """Bucketed means projected onto the given coordinate subset."""
        coords = np.asarray(list(coords), dtype=int)
        return BucketedDataset(self.means[:, coords], self.b)


def generate_sparse_gaussian(
    rng: RngHandle, d: int, k: int, coord_range: float, sigma2: float, n: int
) -> tuple[GroundTruth, Dataset]:
    """Draw a k-sparse mean and n i.i.d. N(mu, sigma2*I) samples.

    The support is uniform over size-k subsets of [d]; nonzero coordinates are
    i.i.d. uniform on [-coord_range, coord_range].
    """
    if k > d:
        raise ValueError(f"k={k} must not exceed d={d}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen = derive_stream(rng, "truth").generator
    support = np.sort(gen.choice(d, size=k, replace=False)) if k > 0 else np.array([], dtype=int)
    mu = np.zeros(d)
    if k > 0:
        mu[support] = gen.uniform(-coord_range, coord_range, size=k)
    sample_gen = derive_stream(rng, "samples").generator
    if sigma2 == 0:
        samples = np.tile(mu, (n, 1))
    else:
        samples = mu + np.sqrt(sigma2) * sample_gen.standard_normal((n, d))
    return GroundTruth(mu=mu, k=k, sigma2=sigma2, support=support), Dataset(samples)


def _unit_support_direction(truth: GroundTruth) -> np.ndarray:
    """A fixed unit direction supported on the true support (e_0 if mu = 0)."""
    u = np.zeros(truth.mu.size)
    norm = np.linalg.norm(truth.mu)
    if norm > 0:
        u[:] = truth.mu / norm
    else:
        u[0] = 1.0
    return u


def contaminate(
    rng: RngHandle, data: Dataset, truth: GroundTruth, spec: ContaminationSpec
) -> Dataset:
    """Replace exactly floor(eta * n) samples according to the named strategy.

    shift_cluster    replaced rows become mu + magnitude * u for the fixed
                     unit direction u on the true support (random rows).
    sign_flip_support  the floor(eta*n) rows with the largest projection onto
                     mu are replaced by -mu + N(0, sigma2*I) noise; the
                     adversary inspects the clean data to pick its victims.
    heavy_outlier    replaced rows become magnitude * e_j for a random
                     off-support coordinate j (random rows).

    Untouched rows are byte-identical to the input.
    """
    n, d = data.n, data.d
    m = int(np.floor(spec.eta * n))
    out = data.samples.copy()
    if m == 0:
        return Dataset(out)
    gen = derive_stream(rng, f"contaminate:{spec.strategy}").generator

    if spec.strategy == "shift_cluster":
        rows = gen.choice(n, size=m, replace=False)
        u = _unit_support_direction(truth)
        out[rows] = truth.mu + spec.magnitude * u
    elif spec.strategy == "sign_flip_support":
        proj = data.samples @ truth.mu
        rows = np.argsort(proj)[-m:]
        noise = np.sqrt(truth.sigma2) * gen.standard_normal((m, d))
        out[rows] = -truth.mu + noise
    else:  # heavy_outlier
        rows = gen.choice(n, size=m, replace=False)
        off_support = np.setdiff1d(np.arange(d), truth.support)
        if off_support.size == 0:
            off_support = np.arange(d)
        cols = gen.choice(off_support, size=m, replace=True)
        out[rows] = 0.0
        out[rows, cols] = spec.magnitude
    return Dataset(out)


def bucket_means(data: Dataset, b: int) -> BucketedDataset:
    """Average disjoint blocks of b consecutive samples; drop the remainder.

    For i.i.d. input the per-coordinate variance shrinks by a factor of b.
    """
    if not (1 <= b <= data.n):
        raise ValueError(f"bucket size b={b} must be in [1, n={data.n}]")
    n_buckets = data.n // b
    trimmed = data.samples[: n_buckets * b]
    means = trimmed.reshape(n_buckets, b, data.d).mean(axis=1)
    return BucketedDataset(means=means, b=b)


def sparsify(x: np.ndarray, k: int, rng: RngHandle) -> np.ndarray:
    """Keep the k largest-magnitude coordinates, breaking ties at random.

    For any k-sparse y, ||sparsify(x, k) - y|| <= 4 ||x - y||.
    """
    x = np.asarray(x, dtype=float)
    if k > x.size:
        raise ValueError(f"k={k} must not exceed dimension {x.size}")
    if k == x.size:
        return x.copy()
    tiebreak = rng.generator.permutation(x.size)
    # lexsort: primary key -|x| (last), tiebreak uniform-at-random (first)
    order = np.lexsort((tiebreak, -np.abs(x)))
    keep = order[:k]
    out = np.zeros_like(x)
    out[keep] = x[keep]
    return out


def support_mass_fraction(estimate_support, truth: GroundTruth) -> float:
    """Fraction of mu's squared l2 mass on the selected coordinates (1 if mu=0)."""
    total = float(np.dot(truth.mu, truth.mu))
    if total == 0:
        return 1.0
    idx = np.asarray(list(estimate_support), dtype=int)
    if idx.size == 0:
        return 0.0
    captured = float(np.dot(truth.mu[idx], truth.mu[idx]))
    return captured / total
