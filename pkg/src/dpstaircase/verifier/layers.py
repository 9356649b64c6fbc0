"""Piecewise-constant radial densities on the l1 layers ``A_i(k)``.

At resolution ``i`` the layer ``A_i(k)`` is the shell
``k D / i <= ||x||_1 < (k + 1) D / i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..core import PrivacyParams

TAIL_MASS_TOL = 1e-12


def layer_volume(i: int, k: int, d: int, delta: float) -> float:
    if i < 1 or k < 0 or d < 1 or delta <= 0:
        raise ValueError("need i >= 1, k >= 0, d >= 1, delta > 0")
    return 2.0**d / math.factorial(d) * ((k + 1) ** d - k**d) * (delta / i) ** d


def layer_volumes(i: int, n: int, d: int, delta: float) -> np.ndarray:
    k = np.arange(n, dtype=float)
    return 2.0**d / math.factorial(d) * ((k + 1) ** d - k**d) * (delta / i) ** d


def layer_l1_moments(i: int, n: int, d: int, delta: float) -> np.ndarray:
    """Integral of ``||x||_1`` over ``A_i(k)`` for ``k < n``."""
    k = np.arange(n, dtype=float)
    return 2.0**d / math.factorial(d - 1) / (d + 1) * ((k + 1) ** (d + 1) - k ** (d + 1)) * (delta / i) ** (d + 1)


@dataclass(frozen=True)
class DensitySequence:
    """Per-layer density values ``a_i(0), a_i(1), ...`` at resolution ``i``."""

    resolution: int
    values: np.ndarray
    params: PrivacyParams

    def __len__(self):
        return len(self.values)

    def volumes(self) -> np.ndarray:
        return layer_volumes(self.resolution, len(self.values), self.params.dimension, self.params.sensitivity)

    def total_mass(self) -> float:
        return math.fsum(self.values * self.volumes())

    def cost(self) -> float:
        """Expected l1 norm under the (truncated) piecewise-constant density."""
        m = layer_l1_moments(self.resolution, len(self.values), self.params.dimension, self.params.sensitivity)
        return math.fsum(self.values * m)

    def dp_worst_ratio(self) -> float:
        """Largest ``a(k1) / a(k2)`` over stored pairs with ``|k1 - k2| <= i``."""
        a = np.asarray(self.values, dtype=float)
        worst = 1.0 if len(a) else 0.0
        for s in range(1, min(self.resolution, len(a) - 1) + 1):
            hi, lo = a[:-s], a[s:]
            for num, den in ((hi, lo), (lo, hi)):
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.where(den > 0, num / den, np.where(num > 0, np.inf, 1.0))
                worst = max(worst, float(np.max(r)))
        return worst

    def is_dp_feasible(self, rtol: float = 1e-12) -> bool:
        return self.dp_worst_ratio() <= math.exp(self.params.epsilon) * (1 + rtol)

    def is_normalized(self, atol: float = 1e-10) -> bool:
        return abs(self.total_mass() - 1.0) <= atol

    def is_nonincreasing(self, rtol: float = 0.0) -> bool:
        a = np.asarray(self.values)
        return bool(np.all(a[1:] <= a[:-1] * (1 + rtol)))


def geometric_extension(base: Sequence[float], params: PrivacyParams, tol: float = TAIL_MASS_TOL) -> DensitySequence:
    """Extend ``a_0 .. a_{i-1}`` by ``a_{k+i} = a_k exp(-eps)``.

    Stops at the first multiple of ``i`` whose remaining mass is below ``tol``.
    """
    base = np.asarray(base, dtype=float)
    i = len(base)
    d, delta, b = params.dimension, params.sensitivity, params.b
    blocks = []
    masses = []
    j = 0
    while True:
        vals = base * b**j
        vol = layer_volumes(i, (j + 1) * i, d, delta)[j * i:]
        masses.append(float(vals @ vol))
        blocks.append(vals)
        j += 1
        if len(masses) >= 3:
            m0, m1, m2 = masses[-3:]
            if m1 > 0 and m2 < m1 and m0 > 0:
                rho = m2 / m1
                # ratios of successive block masses shrink past the peak
                if rho <= m1 / m0 and m2 * rho / (1 - rho) < tol:
                    break
        if masses[-1] == 0.0 and j > 1:
            break
    return DensitySequence(i, np.concatenate(blocks), params)


def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def discretize_distribution(
    density: Callable[[np.ndarray], np.ndarray],
    i: int,
    params: PrivacyParams,
    breakpoints: Optional[Sequence[float]] = None,
    nodes: int = 8,
    tail_tol: float = TAIL_MASS_TOL,
) -> DensitySequence:
    """Average a radial density over each layer ``A_i(k)``.

    ``density`` maps an array of l1 radii to density values. Known
    discontinuities can be passed as ``breakpoints`` so that each quadrature
    panel sees a smooth integrand; a step density with breakpoints on the
    layer grid is then reproduced exactly.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    d, delta = params.dimension, params.sensitivity
    xg, wg = _gauss_legendre(nodes)
    bps = np.unique(np.asarray(breakpoints if breakpoints is not None else [], dtype=float))
    width = delta / i
    const = 2.0**d / math.factorial(d - 1)

    def shell_mass(k: int) -> float:
        r1, r2 = k * width, (k + 1) * width
        cuts = bps[(bps > r1) & (bps < r2)]
        edges = np.concatenate([[r1], cuts, [r2]])
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            r = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
            f = np.asarray(density(r), dtype=float)
            total += 0.5 * (hi - lo) * float(np.sum(wg * f * const * r ** (d - 1)))
        return total

    values = []
    cum = 0.0
    block_masses = []
    k = 0
    while True:
        block = [shell_mass(k + j) for j in range(i)]
        vols = layer_volumes(i, k + i, d, delta)[k:]
        values.extend(np.asarray(block) / vols)
        bm = math.fsum(block)
        cum += bm
        block_masses.append(bm)
        k += i
        if 1.0 - cum < tail_tol:
            break
        if len(block_masses) >= 2 and bm < block_masses[-2] and bm < tail_tol * 1e-4:
            break
        if k > 10**7:
            raise RuntimeError("density tail does not decay")
    return DensitySequence(i, np.asarray(values), params)
