"""Privacy-ratio checks for continuous noise densities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import PrivacyParams
from ..density import StaircaseSpec, band_table, density_value
from ..sampler import RandomSource

DP_RTOL = 1e-12
# keep spot-check points where exp(-eps * layers) is far from underflow
_MAX_LOG_DECAY = 600.0


@dataclass(frozen=True)
class DPCheckResult:
    passed: bool
    worst_ratio: float
    bound: float
    boundary_ratio: float
    spot_ratio: float
    monotone: bool


def staircase_radial(spec: StaircaseSpec) -> Callable[[np.ndarray], np.ndarray]:
    return lambda r: density_value(spec, r)


def corrupted_radial_density(spec: StaircaseSpec, factor: float = 2.0) -> Callable[[np.ndarray], np.ndarray]:
    """Staircase density with layer 0 multiplied by ``factor`` (negative control)."""
    delta = spec.sensitivity

    def f(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < delta, factor, 1.0) * density_value(spec, r)

    return f


def laplace_product_density(params: PrivacyParams) -> Callable[[np.ndarray], np.ndarray]:
    """Joint density of i.i.d. Laplace(sensitivity / epsilon) coordinates; takes ``(n, d)`` points."""
    lam = params.epsilon / params.sensitivity
    norm = (lam / 2.0) ** params.dimension

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return norm * np.exp(-lam * np.abs(x).sum(axis=1))

    return f


def _uniform_ball(rng: RandomSource, n: int, d: int, radius: float) -> np.ndarray:
    # d+1 exponentials give a uniform point of the simplex interior
    e = rng.exponential((n, d + 1))
    mags = radius * e[:, :d] / e.sum(axis=1, keepdims=True)
    return mags * rng.signs((n, d))


def _uniform_sphere(rng: RandomSource, radii: np.ndarray, d: int) -> np.ndarray:
    e = rng.exponential((len(radii), d))
    return radii[:, None] * e / e.sum(axis=1, keepdims=True) * rng.signs((len(radii), d))


def spot_check_dp(density: Callable[[np.ndarray], np.ndarray], params: PrivacyParams,
                  r_max: float, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Worst ``f(x) / f(x + t)`` over random pairs with ``||t||_1 <= sensitivity``.

    Half the shifts lie on the sphere ``||t||_1 = sensitivity``, where the
    ratio is largest for radially decreasing densities.
    """
    rng = RandomSource(seed)
    d, delta = params.dimension, params.sensitivity
    x = _uniform_sphere(rng, rng.open_uniform(n_pairs) * r_max, d)
    t = _uniform_ball(rng, n_pairs, d, delta)
    half = n_pairs // 2
    t[:half] = _uniform_sphere(rng, np.full(half, delta), d)
    fx = np.asarray(density(x), dtype=float)
    fy = np.asarray(density(x + t), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(fy > 0, fx / fy, np.where(fx > 0, np.inf, 0.0))
    return float(ratio.max())


def verify_density_dp(spec: StaircaseSpec, radial: Optional[Callable] = None,
                      n_pairs: int = 10_000, seed: int = 0, rtol: float = DP_RTOL) -> DPCheckResult:
    """Check ``f(r) <= e^eps f(r + sensitivity)`` for a radial density.

    For a step function of ``||x||_1`` both ``f(r)`` and ``f(r + sensitivity)``
    are constant between consecutive points of
    ``{band edges} | {band edges - sensitivity}``, so the ratio is evaluated
    once per such cell, at its midpoint (never on an edge, where rounding
    could assign ``r`` and ``r + sensitivity`` to inconsistent bands).
    Monotonicity is checked on the same midpoints. A random pair spot check
    in ``R^d`` is added on top. ``radial`` defaults to the staircase density
    of ``spec``.
    """
    f = radial if radial is not None else staircase_radial(spec)
    delta, eps = spec.sensitivity, spec.epsilon
    edges = band_table(spec).boundaries()
    r_top = min(edges[-1], delta * (1 + math.floor(_MAX_LOG_DECAY / eps)))
    edges = edges[edges <= r_top]
    cuts = np.unique(np.concatenate([edges, edges - delta]))
    cuts = cuts[(cuts >= 0) & (cuts + delta <= r_top)]
    width = np.diff(cuts)
    # cells a few ulps wide are rounding residue of coinciding edges
    keep = width > 1e-12 * max(r_top, delta)
    pts = 0.5 * (cuts[:-1] + cuts[1:])[keep]
    fx = np.asarray(f(pts), dtype=float)
    fy = np.asarray(f(pts + delta), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(fy > 0, fx / fy, np.where(fx > 0, np.inf, 0.0))
    boundary = float(ratio.max())
    monotone = bool(np.all(np.diff(fx) <= 0))

    spot = spot_check_dp(lambda x: f(np.abs(x).sum(axis=1)), spec.params,
                         r_max=max(r_top - delta, delta), n_pairs=n_pairs, seed=seed)
    bound = math.exp(eps)
    worst = max(boundary, spot)
    passed = worst <= bound * (1 + rtol) and monotone
    return DPCheckResult(passed, worst, bound, boundary, spot, monotone)


def verify_laplace_dp(params: PrivacyParams, n_pairs: int = 10_000, seed: int = 0,
                      rtol: float = DP_RTOL) -> DPCheckResult:
    """Random pair check of the product Laplace density."""
    r_max = _MAX_LOG_DECAY * params.sensitivity / params.epsilon / 2
    worst = spot_check_dp(laplace_product_density(params), params, r_max, n_pairs, seed)
    bound = math.exp(params.epsilon)
    return DPCheckResult(worst <= bound * (1 + rtol), worst, bound, math.nan, worst, True)
