"""Expected l1 cost of the staircase, Laplace and composite mechanisms."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .core import PrivacyParams, c_k
from .density import StaircaseSpec, normalization_a
from .sampler import RandomSource, block_sizes, sample_staircase_radius

DEFAULT_SERIES_TOL = 1e-14


@dataclass(frozen=True)
class CostReport:
    """Costs of every mechanism at one ``(epsilon, sensitivity, dimension)``.

    For ``dimension >= 3`` the staircase optimum ``v_star`` is optimal only
    within the staircase family; optimality over all private mechanisms is
    established for ``dimension <= 2`` only. The asymptotes are two-dimensional
    expansions and are ``None`` in other dimensions.
    """

    epsilon: float
    sensitivity: float
    dimension: int
    gamma_star: float
    v_star: float
    laplace_cost: float
    composite_cost: float
    high_asymptote: Optional[float]
    low_asymptote: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def optimality_proven(self) -> bool:
        return self.dimension <= 2


def _coeffs_2d(params: PrivacyParams):
    b, omb = params.b, params.one_minus_b
    r = b / omb
    # V(g) = (2 delta / 3) * (g^3 + n2 g^2 + n1 g + n0) / (g^2 + m1 g + m0)
    n2 = 3 * r
    n1 = 3 * (b * b + b) / omb**2
    n0 = b * (1 + 4 * b + b * b) / omb**3
    m1 = 2 * r
    m0 = (b + b * b) / omb**2
    return n2, n1, n0, m1, m0


def _check_2d(spec_or_params):
    d = spec_or_params.dimension
    if d != 2:
        raise ValueError(f"closed form is two-dimensional only, got dimension {d}")


def cost_closed_form_2d(spec: StaircaseSpec) -> float:
    _check_2d(spec)
    n2, n1, n0, m1, m0 = _coeffs_2d(spec.params)
    g = spec.gamma
    num = ((g + n2) * g + n1) * g + n0
    den = (g + m1) * g + m0
    return 2.0 * spec.sensitivity / 3.0 * num / den


def cost_derivative_2d(spec: StaircaseSpec) -> float:
    """``dV/dgamma`` of the two-dimensional closed form."""
    _check_2d(spec)
    n2, n1, n0, m1, m0 = _coeffs_2d(spec.params)
    g = spec.gamma
    num = ((g + n2) * g + n1) * g + n0
    dnum = (3 * g + 2 * n2) * g + n1
    den = (g + m1) * g + m0
    dden = 2 * g + m1
    return 2.0 * spec.sensitivity / 3.0 * (dnum * den - num * dden) / den**2


def cost_series(spec: StaircaseSpec, tol: float = DEFAULT_SERIES_TOL) -> float:
    """``E ||X||_1`` in any dimension by summing per-band integrals.

    Layers are added until the geometric bound on the remaining layers drops
    below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d, delta, eps, g = spec.dimension, spec.sensitivity, spec.epsilon, spec.gamma
    a = normalization_a(spec)
    scale = a * 2.0**d / math.factorial(d - 1) / (d + 1) * delta ** (d + 1)
    parts = []
    start, chunk = 0, 256
    while True:
        k = np.arange(start, start + chunk + 1, dtype=float)
        inner = np.exp(-k * eps) * ((k + g) ** (d + 1) - k ** (d + 1))
        outer = np.exp(-(k + 1) * eps) * ((k + 1) ** (d + 1) - (k + g) ** (d + 1))
        layer = scale * (inner + outer)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = layer[1:] / layer[:-1]
            bound = np.where(rho < 1, layer[:-1] * rho / (1 - rho), np.inf)
        rho_falling = np.empty(chunk, dtype=bool)
        rho_falling[:-1] = rho[1:] <= rho[:-1]
        rho_falling[-1] = False
        stop = np.nonzero((bound < tol) & rho_falling | (layer[:-1] == 0) & (k[:-1] > 0))[0]
        if stop.size:
            parts.append(layer[: stop[0] + 1])
            break
        parts.append(layer[:-1])
        start += chunk
        chunk *= 2
    return math.fsum(np.concatenate(parts))


def _shifted_moment(b: float, j: int, g: float) -> float:
    """``sum_k b^k (k + g)^j`` expanded through the ``c_m`` series."""
    return math.fsum(math.comb(j, m) * g ** (j - m) * c_k(b, m) for m in range(j + 1))


def cost_derivative(spec: StaircaseSpec) -> float:
    """``dV/dgamma`` in any dimension.

    Moving ``gamma`` moves the inner/outer split of every layer, which shifts
    mass ``(1 - b) b^k`` per unit area at radius ``(k + gamma) D``; with
    ``A_j = sum_k b^k (k + gamma)^j`` the quotient rule gives
    ``a (1 - b) 2^d D^d / (d-1)! * (D A_d - V A_{d-1})``.
    """
    d, delta, g = spec.dimension, spec.sensitivity, spec.gamma
    b = spec.params.b
    v = staircase_cost(spec)
    a_d = _shifted_moment(b, d, g)
    a_dm1 = _shifted_moment(b, d - 1, g)
    scale = normalization_a(spec) * spec.params.one_minus_b * 2.0**d * delta**d / math.factorial(d - 1)
    return scale * (delta * a_d - v * a_dm1)


def laplace_cost(params: PrivacyParams) -> float:
    return params.dimension * params.sensitivity / params.epsilon


def composite_staircase_cost(params: PrivacyParams) -> float:
    """``d`` times the optimal 1-D staircase cost at budget ``epsilon / d``."""
    from .optimizer import optimal_cost

    p1 = PrivacyParams(params.epsilon / params.dimension, params.sensitivity, 1)
    return params.dimension * optimal_cost(p1)


def staircase_cost(spec: StaircaseSpec) -> float:
    """Closed form in two dimensions, series otherwise."""
    if spec.dimension == 2:
        return cost_closed_form_2d(spec)
    return cost_series(spec)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    n: int

    def __iter__(self):
        yield self.mean
        yield self.std_error


def _block_moments(spec: StaircaseSpec, seed: int, block: int, size: int):
    r = sample_staircase_radius(spec, size, RandomSource.for_block(seed, block))
    mean = float(np.mean(r))
    return size, mean, float(np.sum((r - mean) ** 2))


def cost_monte_carlo(spec: StaircaseSpec, n: int, seed: int = 0, workers: int = 1) -> MonteCarloEstimate:
    """Sample mean and standard error of ``||X||_1`` over ``n`` staircase draws.

    Draws are split into fixed-size blocks, each with its own stream derived
    from ``(seed, block index)``; block statistics are merged in block order,
    so the result does not depend on ``workers``. ``std_error`` is NaN when
    ``n == 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = block_sizes(n)
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda j: _block_moments(spec, seed, *j), jobs))
    else:
        stats = [_block_moments(spec, seed, *j) for j in jobs]
    # pairwise merge of (count, mean, M2)
    count, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = count + nb
        diff = mb - mean
        mean += diff * nb / tot
        m2 += m2b + diff * diff * count * nb / tot
        count = tot
    if n == 1:
        return MonteCarloEstimate(mean, math.nan, n)
    var = m2 / (n - 1)
    return MonteCarloEstimate(mean, math.sqrt(var / n), n)


def cost_report(params: PrivacyParams) -> CostReport:
    from .optimizer import asymptote_high_privacy, asymptote_low_privacy, optimal_gamma

    g = optimal_gamma(params)
    spec = StaircaseSpec(params, g)
    two_d = params.dimension == 2
    return CostReport(
        epsilon=params.epsilon,
        sensitivity=params.sensitivity,
        dimension=params.dimension,
        gamma_star=g,
        v_star=staircase_cost(spec),
        laplace_cost=laplace_cost(params),
        composite_cost=composite_staircase_cost(params),
        high_asymptote=asymptote_high_privacy(params) if two_d else None,
        low_asymptote=asymptote_low_privacy(params) if two_d else None,
    )
