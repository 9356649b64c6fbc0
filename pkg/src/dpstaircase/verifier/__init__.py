"""Numerical oracles for the optimality structure of the staircase mechanism."""
from .averaging import (
    AveragingMatrix,
    average_pmf_over_l1_balls,
    build_averaging_matrix,
    check_averaging_matrix,
    pmf_dp_worst_ratio,
    random_dp_pmf,
    sphere_points,
)
from .dp import DPCheckResult, corrupted_radial_density, verify_density_dp, verify_laplace_dp
from .layers import DensitySequence, discretize_distribution, layer_volume
from .lp import k_of_i, lp_discretized_optimum, wk_uk_hk
