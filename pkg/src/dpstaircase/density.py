"""The multidimensional staircase density and its band decomposition.

The density is a step function of ``r = ||x||_1``. Layer ``k`` covers
``[k, k+1) * sensitivity`` and is split into an INNER band
``[k, k+gamma)`` with value ``exp(-k eps) a(gamma)`` and an OUTER band
``[k+gamma, k+1)`` with value ``exp(-(k+1) eps) a(gamma)``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import PrivacyParams, c_k, ell1_norm

# layers are dropped once exp(-K eps) * a * Vol(layer K) falls below this
BAND_TAIL_TOL = 1e-16


@dataclass(frozen=True)
class StaircaseSpec:
    params: PrivacyParams
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and 0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def sensitivity(self) -> float:
        return self.params.sensitivity

    @property
    def dimension(self) -> int:
        return self.params.dimension


class BandKind(enum.Enum):
    INNER = "inner"
    OUTER = "outer"


@dataclass(frozen=True)
class BandId:
    layer: int
    kind: BandKind

    def radii(self, spec: StaircaseSpec) -> tuple[float, float]:
        """``[r1, r2)`` covered by this band."""
        k, g, delta = self.layer, spec.gamma, spec.sensitivity
        if self.kind is BandKind.INNER:
            return k * delta, (k + g) * delta
        return (k + g) * delta, (k + 1) * delta

    def exponent(self) -> int:
        """Density on the band is ``a(gamma) * exp(-exponent * eps)``."""
        return self.layer if self.kind is BandKind.INNER else self.layer + 1


def normalization_a(spec: StaircaseSpec) -> float:
    """Normalization ``a(gamma)`` of the staircase density, any dimension."""
    return _normalization(spec.params, spec.gamma)


@functools.lru_cache(maxsize=4096)
def _normalization(params: PrivacyParams, gamma: float) -> float:
    d, delta = params.dimension, params.sensitivity
    b = params.b
    omb = params.one_minus_b
    total = math.fsum(
        math.comb(d, j) * c_k(b, d - j) * (b + omb * gamma**j) for j in range(1, d + 1)
    )
    return math.factorial(d) / (2.0**d * delta**d * total)


def normalization_a_2d(spec: StaircaseSpec) -> float:
    """The simplified two-dimensional normalization."""
    if spec.dimension != 2:
        raise ValueError("normalization_a_2d needs dimension 2")
    p = spec.params
    b, omb, g = p.b, p.one_minus_b, spec.gamma
    q = g * g + 2 * b / omb * g + (b + b * b) / omb**2
    return 1.0 / (2.0 * p.sensitivity**2 * q)


def density_value(spec: StaircaseSpec, r):
    """Density on the shell ``||x||_1 = r``. Accepts scalars or arrays."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("radius must be nonnegative")
    delta, g, eps = spec.sensitivity, spec.gamma, spec.epsilon
    t = r_arr / delta
    k = np.floor(t)
    # compare the fractional part so tiny gamma is not lost to rounding of k + gamma
    inner = (t - k) < g
    expo = np.where(inner, k, k + 1)
    out = normalization_a(spec) * np.exp(-expo * eps)
    if out.ndim == 0:
        return float(out)
    return out


def density_at(spec: StaircaseSpec, x: Sequence[float]) -> float:
    """Staircase density at the point ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dimension,):
        raise ValueError(f"expected a vector of length {spec.dimension}, got shape {x.shape}")
    return density_value(spec, ell1_norm(x))


def band_probability(spec: StaircaseSpec, band: BandId) -> float:
    if band.layer < 0:
        raise ValueError("layer must be nonnegative")
    r1, r2 = band.radii(spec)
    d = spec.dimension
    vol = 2.0**d / math.factorial(d) * (r2**d - r1**d)
    return normalization_a(spec) * math.exp(-band.exponent() * spec.epsilon) * vol


@dataclass(frozen=True)
class BandTable:
    """Truncated list of bands in order of increasing radius.

    Zero-width bands (INNER at gamma=0, OUTER at gamma=1) are kept with zero
    probability so that band ``j`` is always layer ``j // 2``.
    """

    spec: StaircaseSpec
    layer: np.ndarray
    inner: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    value: np.ndarray
    prob: np.ndarray

    def __len__(self):
        return len(self.prob)

    def band_ids(self) -> Iterator[BandId]:
        for k, inn in zip(self.layer, self.inner):
            yield BandId(int(k), BandKind.INNER if inn else BandKind.OUTER)

    @property
    def n_layers(self) -> int:
        return len(self.prob) // 2

    def boundaries(self) -> np.ndarray:
        return np.unique(np.concatenate([self.r1, self.r2[-1:]]))


def n_layers(spec: StaircaseSpec, tol: float = BAND_TAIL_TOL) -> int:
    """Number of layers kept by the band enumeration."""
    return _n_layers(spec.params, spec.gamma, tol)


@functools.lru_cache(maxsize=1024)
def _n_layers(params: PrivacyParams, gamma: float, tol: float) -> int:
    d, delta, eps = params.dimension, params.sensitivity, params.epsilon
    a = _normalization(params, gamma)
    scale = 2.0**d / math.factorial(d) * delta**d
    start, chunk = 0, 1024
    while True:
        k = np.arange(start, start + chunk, dtype=float)
        mass = a * np.exp(-k * eps) * scale * ((k + 1) ** d - k**d)
        # past the peak the layer masses only shrink
        decreasing = np.empty_like(mass, dtype=bool)
        decreasing[:-1] = mass[1:] <= mass[:-1]
        decreasing[-1] = False
        hit = np.nonzero((mass < tol) & decreasing)[0]
        if hit.size:
            return int(start + hit[0] + 1)
        start += chunk
        chunk *= 2


def band_table(spec: StaircaseSpec, tol: float = BAND_TAIL_TOL) -> BandTable:
    return _band_table(spec, tol)


@functools.lru_cache(maxsize=256)
def _band_table(spec: StaircaseSpec, tol: float) -> BandTable:
    K = n_layers(spec, tol)
    d, delta, eps, g = spec.dimension, spec.sensitivity, spec.epsilon, spec.gamma
    layers = np.repeat(np.arange(K), 2)
    inner = np.tile([True, False], K)
    kf = layers.astype(float)
    r1 = np.where(inner, kf, kf + g) * delta
    r2 = np.where(inner, kf + g, kf + 1) * delta
    value = normalization_a(spec) * np.exp(-np.where(inner, kf, kf + 1) * eps)
    prob = value * 2.0**d / math.factorial(d) * (r2**d - r1**d)
    for arr in (layers, inner, r1, r2, value, prob):
        arr.setflags(write=False)
    return BandTable(spec, layers, inner, r1, r2, value, prob)
