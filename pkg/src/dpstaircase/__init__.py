"""Correlated staircase noise for epsilon-differentially-private vector queries."""
from .core import PrivacyParams, b_of, c_k, ell1_norm
from .cost import (
    CostReport,
    composite_staircase_cost,
    cost_closed_form_2d,
    cost_monte_carlo,
    cost_report,
    cost_series,
    laplace_cost,
    staircase_cost,
)
from .density import BandId, BandKind, StaircaseSpec, band_probability, density_at, density_value, normalization_a
from .optimizer import (
    asymptote_high_privacy,
    asymptote_low_privacy,
    optimal_cost,
    optimal_gamma,
)
from .sampler import (
    RandomSource,
    sample_composite_staircase,
    sample_laplace_vector,
    sample_staircase,
    sample_staircase_batch,
)

__version__ = "0.1.0"
