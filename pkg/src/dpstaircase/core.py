"""Problem parameters, geometric-series coefficients and l1 geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# relative stopping threshold for the c_k series
SERIES_RTOL = 1e-14


@dataclass(frozen=True)
class PrivacyParams:
    """One problem instance: privacy budget, l1 sensitivity and output dimension.

    ``epsilon`` is in nats. ``sensitivity`` is measured in the l1 norm of the
    query output.
    """

    epsilon: float
    sensitivity: float = 1.0
    dimension: int = 2

    def __post_init__(self):
        if not (isinstance(self.epsilon, (int, float)) and math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if not (isinstance(self.sensitivity, (int, float)) and math.isfinite(self.sensitivity)
                and self.sensitivity > 0):
            raise ValueError("sensitivity must be positive")
        if isinstance(self.dimension, bool) or int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError("dimension must be an integer >= 1")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "sensitivity", float(self.sensitivity))
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def b(self) -> float:
        return b_of(self)

    @property
    def one_minus_b(self) -> float:
        """``1 - b`` without cancellation for small epsilon."""
        return -math.expm1(-self.epsilon)

    def with_epsilon(self, epsilon: float) -> "PrivacyParams":
        return PrivacyParams(epsilon, self.sensitivity, self.dimension)


def b_of(params: PrivacyParams) -> float:
    """Per-layer decay factor ``exp(-epsilon)``."""
    return math.exp(-params.epsilon)


def c_k(b: float, k: int) -> float:
    """``sum_{n >= 0} n**k * b**n`` with the convention ``0**0 == 1``.

    Closed forms are used for ``k <= 2``; higher orders are summed directly
    until the remaining tail is below ``SERIES_RTOL`` of the partial sum.
    """
    if not 0.0 <= b < 1.0:
        raise ValueError(f"b must lie in [0, 1), got {b!r}")
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    k = int(k)
    if b == 0.0:
        return 1.0 if k == 0 else 0.0
    omb = 1.0 - b
    if k == 0:
        return 1.0 / omb
    if k == 1:
        return b / omb**2
    if k == 2:
        return (b * b + b) / omb**3
    return _c_k_series(b, k)


def _c_k_series(b: float, k: int) -> float:
    # Terms rise until n ~ k / -ln(b), then decay. Once the consecutive-term
    # ratio rho is below 1 it keeps shrinking, so term * rho / (1 - rho) bounds
    # the rest of the series.
    log_b = math.log(b)
    terms = []
    n = 1
    while True:
        term = math.exp(k * math.log(n) + n * log_b)
        terms.append(term)
        rho = math.exp(k * math.log1p(1.0 / n) + log_b)
        if rho < 1.0:
            partial = math.fsum(terms)
            if term * rho / (1.0 - rho) < SERIES_RTOL * partial:
                return partial
        n += 1


def ell1_norm(x: Sequence[float]) -> float:
    return float(np.sum(np.abs(np.asarray(x, dtype=float))))


def ell1_ball_volume(radius: float, d: int) -> float:
    """Lebesgue volume of ``{x in R^d : ||x||_1 < radius}``."""
    return 2.0**d / math.factorial(d) * radius**d


def shell_volume(r1: float, r2: float, d: int) -> float:
    """Volume of ``{r1 <= ||x||_1 < r2}``."""
    return 2.0**d / math.factorial(d) * (r2**d - r1**d)


def shell_l1_moment(r1: float, r2: float, d: int) -> float:
    """Integral of ``||x||_1`` over ``{r1 <= ||x||_1 < r2}``."""
    return 2.0**d / math.factorial(d - 1) * (r2 ** (d + 1) - r1 ** (d + 1)) / (d + 1)
