"""Sphere averaging of lattice pmfs on Z^2 and its certifying coefficient matrix.

``B_k`` is the l1 sphere ``{(x, y) : |x| + |y| = k}`` with ``4k`` points,
labelled from the topmost point ``(0, k)`` clockwise. Averaging a private
pmf over every ``B_k`` keeps it private; the matrix ``M`` built here turns
the pointwise inequalities between ``B_k1`` and ``B_k2`` into the averaged
one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

Pmf = Mapping[tuple[int, int], float]


def sphere_points(k: int) -> list[tuple[int, int]]:
    """Points of ``B_k`` in label order (top, then clockwise)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return [(0, 0)]
    pts = []
    for c in range(4 * k):
        q, s = divmod(c, k)
        if q == 0:
            pts.append((s, k - s))
        elif q == 1:
            pts.append((k - s, -s))
        elif q == 2:
            pts.append((-s, -(k - s)))
        else:
            pts.append((-(k - s), s))
    return pts


def _radius(pmf: Pmf) -> int:
    return max((abs(x) + abs(y) for x, y in pmf), default=0)


def average_pmf_over_l1_balls(pmf: Pmf, epsilon: float, delta_int: int,
                              check: bool = False) -> dict[tuple[int, int], float]:
    """Replace ``p`` on every sphere ``B_k`` (``k >= 1``) by its sphere mean.

    The result covers every lattice point up to the largest radius in the
    support. ``epsilon`` and ``delta_int`` describe the privacy constraint the
    input is assumed to satisfy; with ``check=True`` the input is validated
    against it first.
    """
    if delta_int < 1:
        raise ValueError("delta_int must be >= 1")
    if check:
        total = math.fsum(pmf.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pmf sums to {total!r}, not 1")
        if pmf_dp_worst_ratio(pmf, delta_int) > math.exp(epsilon) * (1 + 1e-12):
            raise ValueError("input pmf violates the privacy constraint")
    R = _radius(pmf)
    out = {(0, 0): float(pmf.get((0, 0), 0.0))}
    for k in range(1, R + 1):
        pts = sphere_points(k)
        mean = math.fsum(pmf.get(p, 0.0) for p in pts) / (4 * k)
        for p in pts:
            out[p] = mean
    return out


def _grid(pmf: Pmf):
    R = _radius(pmf)
    n = 2 * R + 1
    arr = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for (x, y), v in pmf.items():
        arr[x + R, y + R] = v
        mask[x + R, y + R] = True
    return arr, mask


def l1_offsets(delta_int: int) -> list[tuple[int, int]]:
    return [(dx, dy) for dx in range(-delta_int, delta_int + 1) for dy in range(-delta_int, delta_int + 1)
            if 0 < abs(dx) + abs(dy) <= delta_int]


def _shifted_pairs(n: int, dx: int, dy: int):
    sa = slice(max(0, -dx), n - max(0, dx))
    sb = slice(max(0, -dy), n - max(0, dy))
    ta = slice(max(0, dx), n - max(0, -dx))
    tb = slice(max(0, dy), n - max(0, -dy))
    return (sa, sb), (ta, tb)


def grid_dp_worst_ratio(arr: np.ndarray, mask: np.ndarray, delta_int: int) -> float:
    """Max ``p(u) / p(v)`` over in-mask pairs at l1 distance ``1..delta_int``."""
    n = arr.shape[0]
    worst = 0.0
    for dx, dy in l1_offsets(delta_int):
        src, dst = _shifted_pairs(n, dx, dy)
        both = mask[src] & mask[dst]
        if not np.any(both):
            continue
        num, den = arr[src][both], arr[dst][both]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
        worst = max(worst, float(r.max()))
    return worst


def pmf_dp_worst_ratio(pmf: Pmf, delta_int: int) -> float:
    """Exhaustive pair check over the support keys of ``pmf``."""
    arr, mask = _grid(pmf)
    return grid_dp_worst_ratio(arr, mask, delta_int)


def pmf_is_dp(pmf: Pmf, epsilon: float, delta_int: int, rtol: float = 1e-12) -> bool:
    return pmf_dp_worst_ratio(pmf, delta_int) <= math.exp(epsilon) * (1 + rtol)


def random_dp_pmf(radius: int, epsilon: float, delta_int: int, rng: np.random.Generator,
                  spread: Optional[float] = None) -> dict[tuple[int, int], float]:
    """Random pmf on the l1 ball of ``radius`` satisfying the pair constraint.

    Log-masses are drawn uniformly on ``[-spread, 0]`` and then clipped
    (``log p(u) <= eps + log p(v)`` for every close pair) until nothing
    changes; normalizing afterwards leaves the ratios untouched.
    """
    n = 2 * radius + 1
    xs = np.arange(n) - radius
    mask = (np.abs(xs)[:, None] + np.abs(xs)[None, :]) <= radius
    if spread is None:
        spread = epsilon * 2 * radius / delta_int
    logp = np.where(mask, rng.uniform(-spread, 0.0, size=(n, n)), np.inf)
    offsets = l1_offsets(delta_int)
    while True:
        bound = np.full((n, n), np.inf)
        for dx, dy in offsets:
            src, dst = _shifted_pairs(n, dx, dy)
            bound[src] = np.minimum(bound[src], logp[dst] + epsilon)
        new = np.where(mask, np.minimum(logp, bound), np.inf)
        if np.array_equal(new, logp):
            break
        logp = new
    p = np.where(mask, np.exp(logp - logp[mask].max()), 0.0)
    p /= math.fsum(p[mask])
    return {(int(x), int(y)): float(p[x + radius, y + radius])
            for x in xs for y in xs if mask[x + radius, y + radius]}


@dataclass(frozen=True)
class AveragingMatrix:
    """Nonnegative ``4 k1 x 4 k2`` coefficients over pairs of ``B_k1 x B_k2``."""

    k1: int
    k2: int
    delta_prime: int
    entries: np.ndarray


def allowed_pattern(k1: int, k2: int) -> np.ndarray:
    """Pairs ``(I_r, O_c)`` at l1 distance exactly ``k2 - k1``."""
    inner = np.array(sphere_points(k1))
    outer = np.array(sphere_points(k2))
    dist = np.abs(inner[:, None, :] - outer[None, :, :]).sum(axis=2)
    return dist == (k2 - k1)


def _quadrant_entries(k1: int, dp: int):
    """Entries of rows ``1..k1`` as ``(row, col, value)`` with 1-based local indices.

    Columns may run from ``1 - dp`` (previous quadrant) to ``k1 + dp``; the
    pattern repeats in every quadrant.
    """
    ent = []
    if k1 <= dp:
        m = dp - k1 + 1
        alpha = dp / (2 * k1 * m)
        beta = (dp - k1) / (k1 * m)
        ent.append((1, 1, 1.0))
        for c in range(k1 + 1, dp + 2):
            ent.append((1, c, alpha))
        for c in range(1 - dp, 2 - k1):
            ent.append((1, c, alpha))
        for r in range(2, k1 + 1):
            ent.append((r, r, 1.0))
            ent.append((r, r + dp, 1.0))
            for c in range(k1 + 1, dp + 2):
                ent.append((r, c, beta))
    else:
        ent.append((1, 1, 1.0))
        for c in list(range(2, dp + 2)) + list(range(1 - dp, 1)):
            ent.append((1, c, 1.0 / (2 * k1)))
        for r in range(2, k1 + 1):
            ent.append((r, r, 1.0 - (2 * r - 3) / (2 * k1)))
            for c in range(r + 1, r + dp):
                ent.append((r, c, 1.0 / k1))
            ent.append((r, r + dp, (2 * r - 1) / (2 * k1)))
    return ent


def build_averaging_matrix(k1: int, delta_prime: int) -> AveragingMatrix:
    """Explicit coefficient matrix with column sums 1 and row sums ``1 + dp / k1``.

    Two constructions, depending on whether ``k1 <= delta_prime``; ``k1 = 1``
    falls in the first and gives 1 on the diagonal entry and 1/2 elsewhere.
    """
    if k1 < 1 or delta_prime < 1:
        raise ValueError("k1 and delta_prime must be >= 1")
    k2 = k1 + delta_prime
    M = np.zeros((4 * k1, 4 * k2))
    for q in range(4):
        for r, c, v in _quadrant_entries(k1, delta_prime):
            M[q * k1 + r - 1, (q * k2 + c - 1) % (4 * k2)] += v
    return AveragingMatrix(k1, k2, delta_prime, M)


@dataclass(frozen=True)
class MatrixCheck:
    passed: bool
    worst_violation: float
    detail: str


def check_averaging_matrix(m: AveragingMatrix, tol: float = 1e-12) -> MatrixCheck:
    M = m.entries
    k1, k2, dp = m.k1, m.k2, m.delta_prime
    if k2 - k1 != dp or M.shape != (4 * k1, 4 * k2):
        return MatrixCheck(False, math.inf, "shape does not match (k1, k2, delta_prime)")
    allowed = allowed_pattern(k1, k2)
    counts = allowed.sum(axis=1)
    corner = np.zeros(4 * k1, dtype=bool)
    corner[::k1] = True
    if not (np.all(counts[corner] == 2 * dp + 1) and np.all(counts[~corner] == dp + 1)):
        return MatrixCheck(False, math.inf, "unexpected allowed pattern")
    checks = {
        "negative entry": float(max(0.0, -M.min())),
        "entry outside pattern": float(np.abs(M[~allowed]).max(initial=0.0)),
        "column sum": float(np.abs(M.sum(axis=0) - 1.0).max()),
        "row sum": float(np.abs(M.sum(axis=1) - (1.0 + dp / k1)).max()),
    }
    name, worst = max(checks.items(), key=lambda kv: kv[1])
    ok = worst <= tol
    return MatrixCheck(ok, worst, "ok" if ok else name)
