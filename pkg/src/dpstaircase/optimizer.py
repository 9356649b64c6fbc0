"""Optimal staircase parameter, optimal cost, and the two-dimensional asymptotes."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import PrivacyParams
from .cost import cost_closed_form_2d, cost_derivative, cost_derivative_2d, cost_series, staircase_cost
from .density import StaircaseSpec

INV_PHI = (math.sqrt(5) - 1) / 2
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class GammaSearch:
    gamma: float
    at_boundary: bool


def golden_section(f: Callable[[float], float], lo: float, hi: float, width: float) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` around a minimum of unimodal ``f`` to ``width``."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > width:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return lo, hi


def minimize_unit_interval(
    f: Callable[[float], float],
    df: Callable[[float], float],
    tol: float = DEFAULT_TOL,
    grid: int = 1001,
) -> GammaSearch:
    """Minimize ``f`` on ``[0, 1]``.

    Golden-section search brackets the minimum to ``10 * tol``; the bracket
    is checked against a coarse grid scan, widened until ``df`` changes sign
    across it, and then bisected on the sign of ``df`` down to ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = golden_section(f, 0.0, 1.0, 10 * tol)

    xs = np.linspace(0.0, 1.0, grid)
    fs = np.array([f(x) for x in xs])
    j = int(np.argmin(fs))
    spacing = 1.0 / (grid - 1)
    if abs(0.5 * (lo + hi) - xs[j]) > spacing + 1e3 * tol:
        # unimodality failed somewhere; restart next to the grid minimum
        lo, hi = golden_section(f, max(0.0, xs[j] - spacing), min(1.0, xs[j] + spacing), 10 * tol)

    step = hi - lo
    dlo = df(lo)
    while dlo > 0 and lo > 0:
        lo = max(0.0, lo - step)
        step *= 2
        dlo = df(lo)
    if dlo >= 0:
        return GammaSearch(lo, lo == 0.0)
    step = hi - lo
    dhi = df(hi)
    while dhi < 0 and hi < 1:
        hi = min(1.0, hi + step)
        step *= 2
        dhi = df(hi)
    if dhi <= 0:
        return GammaSearch(hi, hi == 1.0)

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        dm = df(mid)
        if dm == 0:
            return GammaSearch(mid, False)
        if dm < 0:
            lo = mid
        else:
            hi = mid
    return GammaSearch(0.5 * (lo + hi), False)


def _series_objective(params: PrivacyParams):
    def f(g):
        return cost_series(StaircaseSpec(params, g))

    def df(g):
        return cost_derivative(StaircaseSpec(params, g))

    return f, df


def search_gamma(params: PrivacyParams, tol: float = DEFAULT_TOL) -> GammaSearch:
    """``optimal_gamma`` plus a flag telling whether the minimum sits on ``{0, 1}``."""
    return _search_gamma(params, float(tol))


@functools.lru_cache(maxsize=1024)
def _search_gamma(params: PrivacyParams, tol: float) -> GammaSearch:
    if params.dimension == 2:
        def f(g):
            return cost_closed_form_2d(StaircaseSpec(params, g))

        def df(g):
            return cost_derivative_2d(StaircaseSpec(params, g))

        return minimize_unit_interval(f, df, tol)
    f, df = _series_objective(params)
    return minimize_unit_interval(f, df, tol, grid=201)


def optimal_gamma(params: PrivacyParams, tol: float = DEFAULT_TOL) -> float:
    """Staircase parameter minimizing the expected l1 cost.

    For ``dimension >= 3`` the result is optimal within the staircase family
    only; optimality among all private noise laws is not established there.
    """
    return search_gamma(params, tol).gamma


def optimal_cost(params: PrivacyParams) -> float:
    return staircase_cost(StaircaseSpec(params, optimal_gamma(params)))


def _require_2d(params: PrivacyParams):
    if params.dimension != 2:
        raise ValueError("asymptotic expansions are two-dimensional only")


def asymptote_high_privacy(params: PrivacyParams) -> float:
    """Small-epsilon expansion ``2 D / eps - D eps^2 / (36 sqrt 3)``."""
    _require_2d(params)
    eps, delta = params.epsilon, params.sensitivity
    return 2 * delta / eps - delta * eps**2 / (36 * math.sqrt(3))


def asymptote_low_privacy(params: PrivacyParams) -> float:
    """Large-epsilon expansion ``2^(1/3) D e^(-eps/3) + D e^(-2 eps/3) / 2^(1/3)``."""
    _require_2d(params)
    eps, delta = params.epsilon, params.sensitivity
    cbrt2 = 2.0 ** (1.0 / 3.0)
    return cbrt2 * delta * math.exp(-eps / 3) + delta * math.exp(-2 * eps / 3) / cbrt2
