"""Command-line front end: ``cost``, ``sample``, ``sweep`` and ``verify``."""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import PrivacyParams
from .cost import CostReport, cost_monte_carlo, cost_report
from .density import StaircaseSpec
from .optimizer import optimal_gamma
from .sampler import BLOCK_SIZE, RandomSource, block_sizes, sample_staircase_batch

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKS = ("dp", "matrix", "lp", "averaging")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    """Shortest round-trip text for a float; ``nan``/``inf`` spelled as Python does."""
    if x is None:
        return ""
    return repr(float(x))


@dataclass
class SweepConfig:
    epsilon_list: list[float]
    sensitivity: float = 1.0
    dimension: int = 2
    seed: int = 0
    samples: int = 0
    output_format: str = "csv"

    def __post_init__(self):
        if not self.epsilon_list:
            raise ValueError("epsilon list must be nonempty")
        if any(not (e > 0) or math.isinf(e) for e in self.epsilon_list):
            raise ValueError("epsilon must be positive")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output format must be csv or json")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        PrivacyParams(1.0, self.sensitivity, self.dimension)


SWEEP_HEADER = ["epsilon", "gamma_star", "v_star", "laplace", "composite", "high_asymptote", "low_asymptote"]


def _params(args) -> PrivacyParams:
    eps = args.epsilon
    if not (eps > 0) or math.isinf(eps):
        raise ValueError("epsilon must be positive")
    return PrivacyParams(eps, args.delta, args.dim)


def _json_dump(obj, out):
    json.dump(obj, out, indent=2)
    out.write("\n")


def cmd_cost(args, out) -> int:
    report = cost_report(_params(args))
    _json_dump(report.to_dict(), out)
    return EXIT_OK


def cmd_sample(args, out) -> int:
    params = _params(args)
    gamma = optimal_gamma(params) if args.gamma is None else args.gamma
    spec = StaircaseSpec(params, gamma)
    if args.n < 0:
        raise ValueError("n must be >= 0")
    # fixed-size blocks with per-block streams, same layout as the Monte-Carlo estimator
    for b, size in enumerate(block_sizes(args.n, BLOCK_SIZE)):
        x = sample_staircase_batch(spec, size, RandomSource.for_block(args.seed, b))
        out.write("".join(",".join(map(repr, row)) + "\n" for row in x.tolist()))
    return EXIT_OK


def sweep_rows(cfg: SweepConfig) -> list[dict]:
    rows = []
    for eps in cfg.epsilon_list:
        r: CostReport = cost_report(PrivacyParams(eps, cfg.sensitivity, cfg.dimension))
        row = {
            "epsilon": r.epsilon,
            "gamma_star": r.gamma_star,
            "v_star": r.v_star,
            "laplace": r.laplace_cost,
            "composite": r.composite_cost,
            "high_asymptote": r.high_asymptote,
            "low_asymptote": r.low_asymptote,
        }
        if cfg.samples > 0:
            spec = StaircaseSpec(PrivacyParams(eps, cfg.sensitivity, cfg.dimension), r.gamma_star)
            mc = cost_monte_carlo(spec, cfg.samples, seed=cfg.seed)
            row["mc_mean"] = mc.mean
            row["mc_std_error"] = mc.std_error
        rows.append(row)
    return rows


def cmd_sweep(cfg: SweepConfig, out) -> int:
    rows = sweep_rows(cfg)
    if cfg.output_format == "json":
        _json_dump(rows, out)
        return EXIT_OK
    header = SWEEP_HEADER + (["mc_mean", "mc_std_error"] if cfg.samples > 0 else [])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row[h]) for h in header])
    return EXIT_OK


# --- verify -----------------------------------------------------------------

def _check_dp(args, params) -> dict:
    from .verifier.dp import corrupted_radial_density, verify_density_dp

    gamma = optimal_gamma(params) if args.gamma is None else args.gamma
    spec = StaircaseSpec(params, gamma)
    radial = corrupted_radial_density(spec) if args.corrupt_density else None
    res = verify_density_dp(spec, radial, n_pairs=args.pairs, seed=args.seed)
    return {
        "check": "dp",
        "passed": res.passed,
        "gamma": gamma,
        "worst_ratio": res.worst_ratio,
        "bound": res.bound,
        "monotone": res.monotone,
        "corrupted": bool(args.corrupt_density),
    }


def _check_matrix(args, params) -> dict:
    from .verifier.averaging import build_averaging_matrix, check_averaging_matrix

    failures = []
    worst = 0.0
    for k1 in range(1, args.k1_max + 1):
        for dp in range(1, args.dprime_max + 1):
            res = check_averaging_matrix(build_averaging_matrix(k1, dp))
            worst = max(worst, res.worst_violation)
            if not res.passed:
                failures.append({"k1": k1, "delta_prime": dp, "reason": res.detail})
    return {
        "check": "matrix",
        "passed": not failures,
        "k1_max": args.k1_max,
        "dprime_max": args.dprime_max,
        "worst_violation": worst,
        "failures": failures,
    }


def _check_lp(args, params) -> dict:
    from .verifier.lp import lp_discretized_optimum
    from .cost import cost_closed_form_2d
    from .optimizer import optimal_cost

    if params.dimension != 2:
        raise ValueError("the lp check requires --dim 2")
    levels = sorted(set(args.i))
    values = []
    for i in levels:
        r = lp_discretized_optimum(i, params)
        values.append({"i": i, "value": r.value, "simplex": r.simplex_value,
                       "enumeration": r.enumeration_value})
    seq = [v["value"] for v in values]
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(seq, seq[1:]))
    result = {"check": "lp", "levels": values, "nonincreasing": monotone,
              "optimal_cost": optimal_cost(params)}
    passed = monotone
    if 1 in levels:
        ref = cost_closed_form_2d(StaircaseSpec(params, 1.0))
        result["gamma_one_cost"] = ref
        passed = passed and abs(seq[0] - ref) <= 1e-10 * ref
    result["passed"] = passed
    return result


def _check_averaging(args, params) -> dict:
    from .verifier.averaging import average_pmf_over_l1_balls, pmf_dp_worst_ratio, random_dp_pmf

    rng = np.random.default_rng(args.seed)
    bound = math.exp(params.epsilon) * (1 + 1e-12)
    worst_ratio, worst_mass, failures = 0.0, 0.0, 0
    for t in range(args.trials):
        delta_int = args.delta_int[t % len(args.delta_int)]
        pmf = random_dp_pmf(args.radius, params.epsilon, delta_int, rng)
        avg = average_pmf_over_l1_balls(pmf, params.epsilon, delta_int)
        ratio = pmf_dp_worst_ratio(avg, delta_int)
        mass_err = abs(math.fsum(avg.values()) - math.fsum(pmf.values()))
        worst_ratio = max(worst_ratio, ratio)
        worst_mass = max(worst_mass, mass_err)
        if ratio > bound or mass_err > 1e-14:
            failures += 1
    return {"check": "averaging", "passed": failures == 0, "trials": args.trials,
            "radius": args.radius, "worst_ratio": worst_ratio, "bound": math.exp(params.epsilon),
            "worst_mass_error": worst_mass, "failures": failures}


_CHECK_FNS = {"dp": _check_dp, "matrix": _check_matrix, "lp": _check_lp, "averaging": _check_averaging}


def _summary_line(res: dict) -> str:
    status = "PASS" if res["passed"] else "FAIL"
    extras = []
    for key in ("worst_ratio", "bound", "worst_violation", "gamma_one_cost", "optimal_cost", "worst_mass_error"):
        if key in res:
            extras.append(f"{key}={fmt(res[key])}")
    if "levels" in res:
        extras.append("LP=" + ";".join(f"{v['i']}:{fmt(v['value'])}" for v in res["levels"]))
    return f"{status} {res['check']} " + " ".join(extras)


def cmd_verify(args, out) -> int:
    params = _params(args)
    checks = CHECKS if args.check == "all" else (args.check,)
    results = [_CHECK_FNS[c](args, params) for c in checks]
    ok = all(r["passed"] for r in results)
    if args.json:
        _json_dump({"passed": ok, "results": results}, out)
    else:
        for r in results:
            out.write(_summary_line(r) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


# --- parsing ----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, epsilon_default: Optional[float] = None, epsilon_required: bool = False):
    p.add_argument("--epsilon", type=float, required=epsilon_required, default=epsilon_default,
                   help="privacy budget" + (f" (default {epsilon_default})" if epsilon_default else ""))
    p.add_argument("--delta", type=float, default=1.0, help="l1 sensitivity (default 1)")
    p.add_argument("--dim", type=int, default=2, help="query dimension (default 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="structured JSON output")
    p.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpstaircase", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cost", help="cost report for one epsilon (JSON)")
    _common(p, epsilon_required=True)

    p = sub.add_parser("sample", help="staircase noise vectors as CSV")
    _common(p, epsilon_default=1.0)
    p.add_argument("--gamma", type=float, help="staircase shape (default: optimal)")
    p.add_argument("--n", type=int, default=1)

    p = sub.add_parser("sweep", help="cost table over a list of epsilons")
    _common(p)
    p.add_argument("--epsilon-list", "--epsilons", dest="epsilon_list", type=float, nargs="+")
    p.add_argument("--samples", "--n", dest="samples", type=int, default=0,
                   help="Monte-Carlo samples per epsilon (0 disables)")
    p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("verify", help="run numerical oracles")
    _common(p, epsilon_default=1.0)
    p.add_argument("--check", choices=CHECKS + ("all",), default="all")
    p.add_argument("--gamma", type=float)
    p.add_argument("--k1-max", type=int, default=10)
    p.add_argument("--dprime-max", type=int, default=10)
    p.add_argument("--i", type=int, nargs="+", default=[1, 5, 10, 20, 50])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--radius", type=int, default=12)
    p.add_argument("--delta-int", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--corrupt-density", action="store_true",
                   help="debug: check a deliberately non-private density")
    return parser


def _sweep_config(args) -> SweepConfig:
    eps = args.epsilon_list if args.epsilon_list else ([args.epsilon] if args.epsilon is not None else [])
    if not eps:
        raise ValueError("sweep needs --epsilon-list or --epsilon")
    return SweepConfig(eps, args.delta, args.dim, args.seed, args.samples,
                       args.format or ("json" if args.json else "csv"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"dpstaircase: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with contextlib.ExitStack() as stack:
            out = sys.stdout
            if args.output:
                out = stack.enter_context(open(args.output, "w", newline="\n", encoding="utf-8"))
            if args.command == "cost":
                return cmd_cost(args, out)
            if args.command == "sample":
                return cmd_sample(args, out)
            if args.command == "sweep":
                return cmd_sweep(_sweep_config(args), out)
            return cmd_verify(args, out)
    except ValueError as e:
        print(f"dpstaircase: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
