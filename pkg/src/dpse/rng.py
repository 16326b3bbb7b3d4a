"""Seeded, splittable randomness and the noise primitives every mechanism uses.

All randomness in this package flows through :class:`RngHandle` values.  A
handle is identified by a ``(seed, stream_id)`` pair and is backed by the
counter-based Philox generator, so the same pair always produces the same
draw sequence, on any platform.  Child streams are derived by hashing the
parent's ``stream_id`` together with a text label, which makes streams
path-dependent: ``derive_stream(derive_stream(h, "a"), "a")`` is a different
stream from ``derive_stream(h, "a")``.

There is deliberately no module-level/global generator.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngHandle",
    "LaplaceParams",
    "derive_stream",
    "sample_laplace",
    "sample_gaussian_vector",
]

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


@dataclass
class RngHandle:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The handle's generator is created lazily from the identifying pair, so
    two handles constructed with the same pair produce byte-identical draw
    sequences.  Handles are cheap; derive one per trial / per mechanism call
    and never share a handle across concurrent work.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        self.seed = int(self.seed) & _MASK64
        self.stream_id = int(self.stream_id) & _MASK64

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed, self.stream_id], dtype=_U64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen


def derive_stream(rng: RngHandle, label: str | int) -> RngHandle:
    """Return a child handle for ``label``, deterministic in (stream, label).

    The child's stream id is the first 8 bytes of
    ``blake2b(stream_id || label)``, so distinct labels give statistically
    independent streams and the derivation is path-dependent.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(rng.stream_id.to_bytes(8, "little"))
    h.update(str(label).encode("utf-8"))
    child_id = int.from_bytes(h.digest(), "little")
    return RngHandle(seed=rng.seed, stream_id=child_id)


@dataclass(frozen=True)
class LaplaceParams:
    """Location/scale parameters of a Laplace distribution (variance 2*scale^2)."""

    location: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"Laplace scale must be > 0, got {self.scale}")


def sample_laplace(rng: RngHandle, p: LaplaceParams, size: int | None = None):
    """Draw from Laplace(location, scale) by inverse CDF from one uniform.

    With u uniform on (-1/2, 1/2) the draw is
    ``location - scale * sign(u) * log1p(-2|u|)``, which is exact and
    branch-free.  Returns a scalar when ``size`` is None, else an array.
    """
    gen = rng.generator
    u = gen.random(size)
    # gen.random() is [0, 1); nudge an exact 0 so u - 0.5 stays in (-1/2, 1/2)
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    v = u - 0.5
    draw = p.location - p.scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))
    if size is None:
        return float(draw)
    return draw


def sample_gaussian_vector(
    rng: RngHandle, mean: np.ndarray, per_coord_variance: float
) -> np.ndarray:
    """One i.i.d. spherical Gaussian draw around ``mean``.

    Variance 0 returns ``mean`` exactly (no degenerate normal call).
    """
    mean = np.asarray(mean, dtype=float)
    if not np.all(np.isfinite(mean)):
        raise ValueError("mean must be finite")
    if per_coord_variance < 0:
        raise ValueError(
            f"per-coordinate variance must be >= 0, got {per_coord_variance}"
        )
    if per_coord_variance == 0:
        return mean.copy()
    gen = rng.generator
    return mean + np.sqrt(per_coord_variance) * gen.standard_normal(mean.shape)
