"""Discretized cost-minimization LP over geometrically decaying layer densities.

For ``d = 2`` and resolution ``i``, a radial density that is constant on
each ``A_i(k)`` and decays by ``exp(-eps)`` every ``i`` layers is fixed by
``a_0 .. a_{i-1}``. Its cost is ``sum w_k a_k`` and its mass
``sum u_k a_k``; privacy plus monotonicity reduce to
``a_0 >= ... >= a_{i-1} >= a_0 exp(-eps)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import PrivacyParams, c_k
from .layers import DensitySequence, geometric_extension
from .simplex import simplex

AGREEMENT_RTOL = 1e-9


def _require_2d(params: PrivacyParams):
    if params.dimension != 2:
        raise ValueError("the layer LP is implemented for dimension 2")


def _c012(params: PrivacyParams):
    b = params.b
    return c_k(b, 0), c_k(b, 1), c_k(b, 2)


def wk_uk_hk(i: int, k: int, params: PrivacyParams) -> tuple[float, float, float]:
    """Cost weight, mass weight and their ratio for layer class ``k``."""
    _require_2d(params)
    if i < 1 or not 0 <= k <= i - 1:
        raise ValueError("need i >= 1 and 0 <= k <= i - 1")
    c0, c1, c2 = _c012(params)
    s = params.sensitivity / i
    u = 2 * s**2 * ((1 + 2 * k) * c0 + 2 * i * c1)
    w = 4.0 / 3.0 * s**3 * (3 * i * i * c2 + (6 * i * k + 3 * i) * c1 + (1 + 3 * k + 3 * k * k) * c0)
    return w, u, w / u


def lp_weights(i: int, params: PrivacyParams) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``w_0..w_{i-1}`` and ``u_0..u_{i-1}``."""
    _require_2d(params)
    c0, c1, c2 = _c012(params)
    s = params.sensitivity / i
    k = np.arange(i, dtype=float)
    u = 2 * s**2 * ((1 + 2 * k) * c0 + 2 * i * c1)
    w = 4.0 / 3.0 * s**3 * (3 * i * i * c2 + (6 * i * k + 3 * i) * c1 + (1 + 3 * k + 3 * k * k) * c0)
    return w, u


def h_sequence(i: int, params: PrivacyParams) -> np.ndarray:
    w, u = lp_weights(i, params)
    return w / u


def g_prime(k: float, i: int, params: PrivacyParams) -> float:
    """Derivative in ``k`` of the continuous extension of ``h_k * 3 i / (2 D)``."""
    c0, c1, c2 = _c012(params)
    num = (6 * c0**2 * k**2 + 6 * c0**2 * k + c0**2 + 12 * c0 * c1 * i * k + 6 * c0 * c1 * i
           - 6 * c2 * c0 * i**2 + 12 * c1**2 * i**2)
    return num / ((1 + 2 * k) * c0 + 2 * i * c1) ** 2


def k_of_i(i: int, params: PrivacyParams) -> int:
    """Index where ``h_k`` stops decreasing (first minimizer of the scan)."""
    _require_2d(params)
    if i < 2:
        raise ValueError("i must be >= 2")
    return int(np.argmin(h_sequence(i, params)))


def is_valley(seq: np.ndarray, pivot: int) -> bool:
    """``seq`` nonincreasing up to ``pivot`` and nondecreasing after it."""
    seq = np.asarray(seq)
    return bool(np.all(np.diff(seq[: pivot + 1]) <= 0) and np.all(np.diff(seq[pivot:]) >= 0))


def two_level_candidates(i: int, params: PrivacyParams):
    """Yield ``(k, t, value)`` over switch index ``k`` and boundary ratio ``t``.

    Candidate shape: ``a_j = 1`` for ``j < k``, ``a_k = t``,
    ``a_j = exp(-eps)`` for ``j > k``, with ``t`` in ``{1, exp(-eps)}``.
    The objective is linear-fractional in ``t``, so these endpoints cover the
    family.
    """
    w, u = lp_weights(i, params)
    b = params.b
    w_pre = np.concatenate([[0.0], np.cumsum(w)])
    u_pre = np.concatenate([[0.0], np.cumsum(u)])
    for k in range(i):
        w_post = w_pre[-1] - w_pre[k + 1]
        u_post = u_pre[-1] - u_pre[k + 1]
        for t in (1.0, b):
            num = w_pre[k] + t * w[k] + b * w_post
            den = u_pre[k] + t * u[k] + b * u_post
            yield k, t, num / den


def two_level_shape(i: int, k: int, t: float, b: float) -> np.ndarray:
    a = np.full(i, b)
    a[:k] = 1.0
    a[k] = t
    return a


def lp_by_enumeration(i: int, params: PrivacyParams) -> tuple[float, np.ndarray]:
    w, u = lp_weights(i, params)
    best = min(two_level_candidates(i, params), key=lambda c: c[2])
    k, t, value = best
    a = two_level_shape(i, k, t, params.b)
    return value, a / float(u @ a)


def lp_by_simplex(i: int, params: PrivacyParams) -> tuple[float, np.ndarray]:
    w, u = lp_weights(i, params)
    # rows: a_{k+1} - a_k <= 0, then a_0 - e^eps a_{i-1} <= 0
    A_ub = np.zeros((i, i))
    for k in range(i - 1):
        A_ub[k, k] = -1.0
        A_ub[k, k + 1] = 1.0
    A_ub[i - 1, 0] += 1.0
    A_ub[i - 1, i - 1] -= math.exp(params.epsilon)
    res = simplex(w, A_ub, np.zeros(i), u[None, :], [1.0])
    return res.value, res.x


@dataclass(frozen=True)
class LPResult:
    value: float
    solution: DensitySequence
    simplex_value: float
    enumeration_value: float
    base: np.ndarray

    def __iter__(self):
        yield self.value
        yield self.solution


def lp_discretized_optimum(i: int, params: PrivacyParams) -> LPResult:
    """Optimum of the layer LP at resolution ``i``, solved two independent ways.

    The simplex optimum and the best two-level candidate must agree to
    ``AGREEMENT_RTOL``; the returned sequence is the simplex solution extended
    geometrically.
    """
    _require_2d(params)
    if i < 1:
        raise ValueError("i must be >= 1")
    sv, sx = lp_by_simplex(i, params)
    ev, _ = lp_by_enumeration(i, params)
    if abs(sv - ev) > AGREEMENT_RTOL * abs(ev):
        raise RuntimeError(f"simplex {sv!r} and enumeration {ev!r} disagree at i={i}")
    return LPResult(sv, geometric_extension(sx, params), sv, ev, sx)


def count_intermediate_levels(a: np.ndarray, atol: float = 1e-9) -> int:
    """Entries strictly between ``a[0]`` and ``a[-1]`` (relative to ``a[0]``)."""
    a = np.asarray(a, dtype=float)
    tol = atol * abs(a[0])
    return int(np.sum((a < a[0] - tol) & (a > a[-1] + tol)))
