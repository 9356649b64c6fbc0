"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
Runtime limits are measured with cold caches.
"""
import io
import math
import time

import numpy as np
import pytest

from dpstaircase.cli import build_parser, cmd_cost
from dpstaircase.core import PrivacyParams, c_k
from dpstaircase.cost import composite_staircase_cost, cost_closed_form_2d, cost_monte_carlo, staircase_cost
from dpstaircase.density import StaircaseSpec, _band_table, _n_layers, _normalization, band_table, density_value
from dpstaircase.optimizer import _search_gamma, optimal_cost, optimal_gamma
from dpstaircase.verifier.averaging import (
    allowed_pattern,
    average_pmf_over_l1_balls,
    build_averaging_matrix,
    check_averaging_matrix,
    pmf_dp_worst_ratio,
    random_dp_pmf,
)
from dpstaircase.verifier.dp import corrupted_radial_density, verify_density_dp
from dpstaircase.verifier.layers import discretize_distribution
from dpstaircase.verifier.lp import count_intermediate_levels, h_sequence, is_valley, k_of_i, lp_discretized_optimum

# the displayed zero/nonzero pattern (8 x 16) for two nested l1 spheres
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


def cold():
    for fn in (_search_gamma, _normalization, _band_table, _n_layers):
        fn.cache_clear()


def report(num, title, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {num:2d} {title}: {detail}; {elapsed:.3f}s (limit {limit}s)"
    print(line)
    return ok and in_time, line


def criterion_1():
    cold()
    t = time.perf_counter()
    args = build_parser().parse_args(["cost", "--epsilon", "2", "--delta", "1", "--dim", "2"])
    buf = io.StringIO()
    code = cmd_cost(args, buf)
    import json

    rep = json.loads(buf.getvalue())
    elapsed = time.perf_counter() - t
    ok = code == 0 and abs(rep["laplace_cost"] - 1.0) <= 2.0**-52
    return report(1, "Laplace cost exactness", ok, f"laplace_cost={rep['laplace_cost']!r}", elapsed, 0.1)


def criterion_2():
    cold()
    t = time.perf_counter()
    errs = []
    for eps in (0.01, 0.05):
        v = optimal_cost(PrivacyParams(eps, 1.0, 2))
        errs.append(abs(v - (2 / eps - eps**2 / (36 * math.sqrt(3)))))
    elapsed = time.perf_counter() - t
    ok = max(errs) <= 2e-4
    return report(2, "high-privacy asymptote", ok, f"abs errors {errs[0]:.3e}, {errs[1]:.3e} (tol 2e-4)",
                  elapsed, 1.0)


def criterion_3():
    cold()
    t = time.perf_counter()
    rel = []
    for eps in (15.0, 20.0):
        v = optimal_cost(PrivacyParams(eps, 1.0, 2))
        asym = 2 ** (1 / 3) * math.exp(-eps / 3) + math.exp(-2 * eps / 3) / 2 ** (1 / 3)
        rel.append(abs(v - asym) / v)
    elapsed = time.perf_counter() - t
    ok = max(rel) <= 0.02
    return report(3, "low-privacy asymptote", ok, f"rel errors {rel[0]:.3e}, {rel[1]:.3e} (tol 2%)", elapsed, 1.0)


def criterion_4():
    cold()
    t = time.perf_counter()
    eps = np.arange(12.0, 25.0)
    lv = [math.log(optimal_cost(PrivacyParams(e, 1.0, 2))) for e in eps]
    lc = [math.log(composite_staircase_cost(PrivacyParams(e, 1.0, 2))) for e in eps]
    s_opt = np.polyfit(eps, lv, 1)[0]
    s_comp = np.polyfit(eps, lc, 1)[0]
    elapsed = time.perf_counter() - t
    ok = abs(s_opt + 1 / 3) <= 0.1 / 3 and abs(s_comp + 1 / 4) <= 0.1 / 4
    return report(4, "exponential scaling", ok, f"slopes optimal={s_opt:.5f} (-1/3), composite={s_comp:.5f} (-1/4)",
                  elapsed, 10.0)


def criterion_5():
    cold()
    t = time.perf_counter()
    p = PrivacyParams(1.0, 1.0, 2)
    spec = StaircaseSpec(p, optimal_gamma(p))
    mc = cost_monte_carlo(spec, 10**6, seed=2024)
    exact = cost_closed_form_2d(spec)
    elapsed = time.perf_counter() - t
    diff = abs(mc.mean - exact)
    ok = diff <= 3 * mc.std_error and diff <= 0.01 and diff <= 0.01 * exact
    return report(5, "sampler vs closed form", ok,
                  f"mean={mc.mean:.6f} exact={exact:.6f} |diff|={diff:.2e} = {diff / mc.std_error:.2f} SE",
                  elapsed, 30.0)


def criterion_6():
    cold()
    t = time.perf_counter()
    worst, all_pass, controls_fail = 0.0, True, True
    for eps in (0.1, 1.0, 10.0):
        for d in (1, 2, 3):
            p = PrivacyParams(eps, 1.0, d)
            spec = StaircaseSpec(p, optimal_gamma(p))
            res = verify_density_dp(spec)
            worst = max(worst, res.worst_ratio / res.bound)
            all_pass &= res.passed
            controls_fail &= not verify_density_dp(spec, corrupted_radial_density(spec)).passed
    elapsed = time.perf_counter() - t
    ok = all_pass and controls_fail
    return report(6, "density privacy check", ok,
                  f"all pass={all_pass}, max ratio/e^eps={worst:.15f}, negative controls fail={controls_fail}",
                  elapsed, 5.0)


def criterion_7():
    t = time.perf_counter()
    failures = []
    for k1 in range(1, 11):
        for dp in range(1, 11):
            res = check_averaging_matrix(build_averaging_matrix(k1, dp))
            if not res.passed:
                failures.append((k1, dp, res.detail))
    shown = np.array([[ch == "x" for ch in row] for row in DISPLAYED.split()])
    # the displayed 8 x 16 matrix has k2 = 4 columns per quadrant, i.e. k1 = 2 with delta' = 2
    pattern_ok = np.array_equal(shown, allowed_pattern(2, 4)) and bool(
        np.all(shown[build_averaging_matrix(2, 2).entries > 0]))
    m23 = build_averaging_matrix(2, 3)
    m23_ok = check_averaging_matrix(m23).passed and bool(np.all(allowed_pattern(2, 5)[m23.entries > 0]))
    elapsed = time.perf_counter() - t
    ok = not failures and pattern_ok and m23_ok
    return report(7, "averaging matrix construction", ok,
                  f"100 matrices, failures={failures}, displayed pattern match={pattern_ok}, "
                  f"k1=2 delta'=3 support ok={m23_ok}", elapsed, 5.0)


def criterion_8():
    t = time.perf_counter()
    rng = np.random.default_rng(8)
    eps = 1.0
    bound = math.exp(eps) * (1 + 1e-12)
    worst_ratio, worst_mass, bad = 0.0, 0.0, 0
    for trial in range(1000):
        delta_int = (1, 2, 3)[trial % 3]
        pmf = random_dp_pmf(12, eps, delta_int, rng)
        avg = average_pmf_over_l1_balls(pmf, eps, delta_int)
        ratio = pmf_dp_worst_ratio(avg, delta_int)
        mass = abs(math.fsum(avg.values()) - math.fsum(pmf.values()))
        worst_ratio, worst_mass = max(worst_ratio, ratio), max(worst_mass, mass)
        bad += ratio > bound or mass > 1e-14
    elapsed = time.perf_counter() - t
    return report(8, "averaging preserves privacy", bad == 0,
                  f"1000 pmfs, failures={bad}, max ratio/e^eps={worst_ratio / math.exp(eps):.15f}, "
                  f"max mass change={worst_mass:.1e}", elapsed, 30.0)


def printed_h(i, k, p):
    c0, c1, c2 = (c_k(p.b, j) for j in range(3))
    return 2 / 3 * p.sensitivity / i * (3 * i * i * c2 + (6 * i * k + 3 * i) * c1 + (1 + 3 * k + 3 * k * k) * c0) / (
        (1 + 2 * k) * c0 + 2 * i * c1)


def criterion_9():
    t = time.perf_counter()
    bad, worst_rel = [], 0.0
    for eps in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        p = PrivacyParams(eps, 1.0, 2)
        for i in range(2, 101):
            h = h_sequence(i, p)
            ref = np.array([printed_h(i, k, p) for k in range(i)])
            worst_rel = max(worst_rel, float(np.max(np.abs(h - ref) / ref)))
            if not (is_valley(h, k_of_i(i, p)) and h[0] <= h[-1]):
                bad.append((eps, i))
    elapsed = time.perf_counter() - t
    ok = not bad and worst_rel <= 1e-12
    return report(9, "h-sequence structure", ok,
                  f"594 sequences, shape failures={bad}, max rel dev from printed form={worst_rel:.1e}",
                  elapsed, 5.0)


def criterion_10():
    cold()
    t = time.perf_counter()
    p = PrivacyParams(2.0, 1.0, 2)
    lp1 = lp_discretized_optimum(1, p)
    ref = cost_closed_form_2d(StaircaseSpec(p, 1.0))
    res = [lp_discretized_optimum(i, p) for i in (5, 10, 20, 50)]
    vals = [r.value for r in res]
    v_star = optimal_cost(p)
    agree = max(abs(r.simplex_value - r.enumeration_value) / r.enumeration_value for r in [lp1] + res)
    levels = max(count_intermediate_levels(r.base) for r in [lp1] + res)
    elapsed = time.perf_counter() - t
    checks = [
        abs(lp1.value - ref) <= 1e-10,
        all(b <= a for a, b in zip(vals, vals[1:])),
        abs(vals[-1] - v_star) / v_star <= 0.05,
        agree <= 1e-9,
        levels <= 1,
    ]
    return report(10, "LP oracle convergence", all(checks),
                  f"LP(1)-V(1)={lp1.value - ref:.1e}, LP(5,10,20,50)={['%.8f' % v for v in vals]}, "
                  f"V*={v_star:.8f}, simplex/enum rel diff={agree:.1e}, intermediate levels<={levels}",
                  elapsed, 60.0)


def criterion_11():
    cold()
    t = time.perf_counter()
    p = PrivacyParams(1.0, 1.0, 2)
    spec = StaircaseSpec(p, 0.3)
    i = 100
    seq = discretize_distribution(lambda r: density_value(spec, r), i, p, breakpoints=band_table(spec).boundaries())
    exact = staircase_cost(spec)
    change = abs(seq.cost() - exact) / exact
    # gamma = 0.3 puts every band edge on the 1/100 layer grid
    mid = (np.arange(len(seq)) + 0.5) / i
    step = density_value(spec, mid)
    step_dev = float(np.max(np.abs(seq.values - step) / step))
    elapsed = time.perf_counter() - t
    ok = change <= 0.01 and step_dev <= 1e-12
    return report(11, "discretization consistency", ok,
                  f"cost change={change:.1e} (tol 1%), max rel step deviation={step_dev:.1e}", elapsed, 5.0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{n:02d}" for n in range(1, 12)])
def test_criterion(fn, capsys):
    with capsys.disabled():
        print()
        ok, line = fn()
    assert ok, line


if __name__ == "__main__":
    results = [fn()[0] for fn in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    raise SystemExit(0 if all(results) else 1)
