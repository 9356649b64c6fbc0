"""Exact samplers for the staircase, Laplace and composite-staircase mechanisms.

Staircase noise is drawn in three stages: pick a band by inverse CDF over
the band masses, draw the radius inside the band with density proportional
to ``r**(d-1)``, then place the point uniformly on the l1 sphere of that
radius (normalized exponentials plus independent signs).
"""
from __future__ import annotations

import numpy as np

from .core import PrivacyParams
from .density import StaircaseSpec, band_table


class RandomSource:
    """Seeded PCG64 stream (period 2**128).

    Not safe to share between threads; derive one per shard with
    :meth:`for_block`.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    @classmethod
    def for_block(cls, seed: int, block: int) -> "RandomSource":
        """Independent stream for work unit ``block`` of the master ``seed``."""
        src = cls.__new__(cls)
        src.seed = int(seed)
        ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
        src.generator = np.random.Generator(np.random.PCG64(ss))
        return src

    def open_uniform(self, size=None):
        """Uniforms on the open interval (0, 1)."""
        n = self.generator.integers(0, 2**52, size=size, dtype=np.int64)
        return (n + 0.5) * 2.0**-52

    def exponential(self, size=None):
        return -np.log(self.open_uniform(size))

    def signs(self, size=None):
        return np.where(self.generator.integers(0, 2, size=size) == 1, 1.0, -1.0)


def _as_rng(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    return RandomSource(0 if rng is None else rng)


def sample_staircase(spec: StaircaseSpec, rng: RandomSource) -> np.ndarray:
    """One staircase noise vector of length ``spec.dimension``."""
    return sample_staircase_batch(spec, 1, rng)[0]


def sample_staircase_batch(spec: StaircaseSpec, n: int, rng: RandomSource) -> np.ndarray:
    """``n`` staircase noise vectors as an ``(n, d)`` array."""
    rng = _as_rng(rng)
    d = spec.dimension
    radius = sample_staircase_radius(spec, n, rng)
    e = rng.exponential((n, d))
    mags = radius[:, None] * e / e.sum(axis=1, keepdims=True)
    return mags * rng.signs((n, d))


def sample_staircase_radius(spec: StaircaseSpec, n: int, rng: RandomSource) -> np.ndarray:
    """``n`` draws of ``||X||_1`` for staircase noise."""
    rng = _as_rng(rng)
    table = band_table(spec)
    cdf = np.cumsum(table.prob)
    # truncated tail mass goes to the last band
    u = rng.open_uniform(n) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    d = spec.dimension
    lo = table.r1[idx] ** d
    hi = table.r2[idx] ** d
    v = rng.open_uniform(n)
    return (lo + v * (hi - lo)) ** (1.0 / d)


def sample_laplace_vector(params: PrivacyParams, rng: RandomSource) -> np.ndarray:
    return sample_laplace_batch(params, 1, rng)[0]


def sample_laplace_batch(params: PrivacyParams, n: int, rng: RandomSource) -> np.ndarray:
    """Independent Laplace(sensitivity / epsilon) noise on each coordinate."""
    rng = _as_rng(rng)
    scale = params.sensitivity / params.epsilon
    u = rng.open_uniform((n, params.dimension))
    # inverse CDF of the Laplace law, one uniform per variate
    return np.where(u < 0.5, scale * np.log(2.0 * u), -scale * np.log(2.0 * (1.0 - u)))


def composite_component_spec(params: PrivacyParams) -> StaircaseSpec:
    """One-dimensional staircase used per coordinate by the composite mechanism."""
    from .optimizer import optimal_gamma

    p1 = PrivacyParams(params.epsilon / params.dimension, params.sensitivity, 1)
    return StaircaseSpec(p1, optimal_gamma(p1))


def sample_composite_staircase(params: PrivacyParams, rng: RandomSource) -> np.ndarray:
    return sample_composite_batch(params, 1, rng)[0]


def sample_composite_batch(params: PrivacyParams, n: int, rng: RandomSource) -> np.ndarray:
    """Independent 1-D staircase noise at budget ``epsilon / d`` per coordinate."""
    rng = _as_rng(rng)
    spec1 = composite_component_spec(params)
    d = params.dimension
    # coordinate-major draw keeps d == 1 identical to sample_staircase_batch
    cols = [sample_staircase_batch(spec1, n, rng)[:, 0] for _ in range(d)]
    return np.stack(cols, axis=1)


def staircase_radial_cdf(spec: StaircaseSpec, r):
    """Analytic CDF of ``||X||_1`` for staircase noise."""
    table = band_table(spec)
    d = spec.dimension
    r = np.atleast_1d(np.asarray(r, dtype=float))
    cum = np.concatenate([[0.0], np.cumsum(table.prob)])
    idx = np.searchsorted(table.r2, r, side="right")
    idx = np.minimum(idx, len(table.prob) - 1)
    lo, hi = table.r1[idx], table.r2[idx]
    width = hi**d - lo**d
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, (np.clip(r, lo, hi) ** d - lo**d) / width, 0.0)
    out = cum[idx] + table.prob[idx] * frac
    return np.minimum(out, 1.0)


BLOCK_SIZE = 1 << 16


def block_sizes(n: int, block: int = BLOCK_SIZE) -> list[int]:
    """Split ``n`` draws into fixed-size work units (last one may be short)."""
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])
