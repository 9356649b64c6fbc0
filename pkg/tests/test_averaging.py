import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpstaircase.verifier.averaging import (
    AveragingMatrix,
    allowed_pattern,
    average_pmf_over_l1_balls,
    build_averaging_matrix,
    check_averaging_matrix,
    l1_offsets,
    pmf_dp_worst_ratio,
    pmf_is_dp,
    random_dp_pmf,
    sphere_points,
)

# the displayed 8 x 16 zero/nonzero pattern for two nested l1 spheres
DISPLAYED = """
xxx00000000000xx
0xxx000000000000
00xxxxx000000000
00000xxx00000000
000000xxxxx00000
000000000xxx0000
0000000000xxxxx0
0000000000000xxx
"""


def displayed_pattern():
    return np.array([[ch == "x" for ch in row] for row in DISPLAYED.split()])


def test_sphere_points_labels():
    assert sphere_points(0) == [(0, 0)]
    assert sphere_points(1) == [(0, 1), (1, 0), (0, -1), (-1, 0)]
    pts = sphere_points(3)
    assert pts[0] == (0, 3) and pts[1] == (1, 2) and pts[3] == (3, 0)
    assert len(set(pts)) == 12
    assert all(abs(x) + abs(y) == 3 for x, y in pts)
    with pytest.raises(ValueError):
        sphere_points(-1)


def test_displayed_pattern_is_two_and_four():
    assert np.array_equal(allowed_pattern(2, 4), displayed_pattern())


def test_matrix_respects_displayed_pattern():
    m = build_averaging_matrix(2, 2)
    assert np.all(displayed_pattern()[m.entries > 0])
    assert check_averaging_matrix(m).passed


def test_matrix_two_three_values():
    m = build_averaging_matrix(2, 3).entries
    assert m.shape == (8, 20)
    assert m[0, 0] == 1
    assert set(np.round(m[m > 0], 12)) == {1.0, 0.375, 0.25}
    assert np.allclose(m.sum(axis=1), 2.5)
    assert np.allclose(m.sum(axis=0), 1.0)


def test_k1_one_is_half():
    m = build_averaging_matrix(1, 3).entries
    vals = m[0][m[0] > 0]
    assert vals[0] == 1 and np.allclose(vals[1:], 0.5)


@pytest.mark.parametrize("k1", range(1, 11))
@pytest.mark.parametrize("dp", range(1, 11))
def test_matrix_grid(k1, dp):
    res = check_averaging_matrix(build_averaging_matrix(k1, dp))
    assert res.passed, res


def test_check_flags_bad_matrices():
    m = build_averaging_matrix(3, 2)
    bad = m.entries.copy()
    bad[0, 0] = -0.1
    assert not check_averaging_matrix(AveragingMatrix(3, 5, 2, bad)).passed
    bad = m.entries.copy()
    bad[0, 7] = 0.5
    assert check_averaging_matrix(AveragingMatrix(3, 5, 2, bad)).detail in ("entry outside pattern", "row sum",
                                                                           "column sum")
    assert not check_averaging_matrix(AveragingMatrix(3, 6, 2, m.entries)).passed
    with pytest.raises(ValueError):
        build_averaging_matrix(0, 1)


def test_matrix_certifies_averaged_inequality():
    # combining the pointwise inequalities with M reproduces the averaged one
    k1, dp = 3, 4
    m = build_averaging_matrix(k1, dp).entries
    rng = np.random.default_rng(0)
    p_in = rng.uniform(1, 2, 4 * k1)
    p_out = rng.uniform(1, 2, 4 * (k1 + dp))
    lhs = (m * p_in[:, None]).sum()
    rhs = (m * p_out[None, :]).sum()
    assert lhs == pytest.approx((1 + dp / k1) * p_in.sum())
    assert rhs == pytest.approx(p_out.sum())


def test_averaging_mass_and_privacy():
    rng = np.random.default_rng(1)
    pmf = random_dp_pmf(6, 0.7, 2, rng)
    assert math.fsum(pmf.values()) == pytest.approx(1.0, abs=1e-14)
    assert pmf_is_dp(pmf, 0.7, 2)
    avg = average_pmf_over_l1_balls(pmf, 0.7, 2, check=True)
    assert set(avg) == set(pmf)
    assert abs(math.fsum(avg.values()) - 1.0) < 1e-14
    assert pmf_is_dp(avg, 0.7, 2)
    for k in range(1, 7):
        vals = {avg[q] for q in sphere_points(k)}
        assert len(vals) == 1


def test_averaging_rejects_bad_input():
    pmf = {(0, 0): 0.9, (1, 0): 0.1}
    with pytest.raises(ValueError):
        average_pmf_over_l1_balls(pmf, 0.1, 1, check=True)
    with pytest.raises(ValueError):
        average_pmf_over_l1_balls(pmf, 0.1, 0)


def test_pair_check_exact_ratio():
    pmf = {(0, 0): 0.5, (1, 0): 0.25, (0, 3): 0.25}
    assert pmf_dp_worst_ratio(pmf, 1) == pytest.approx(2.0)
    assert len(l1_offsets(1)) == 4 and len(l1_offsets(2)) == 12


@given(st.integers(1, 5), st.floats(0.1, 3.0), st.integers(1, 3), st.integers(0, 2**32))
def test_random_pmfs_are_feasible(radius, eps, delta_int, seed):
    pmf = random_dp_pmf(radius, eps, delta_int, np.random.default_rng(seed))
    assert pmf_is_dp(pmf, eps, delta_int)
    avg = average_pmf_over_l1_balls(pmf, eps, delta_int)
    assert pmf_is_dp(avg, eps, delta_int)
