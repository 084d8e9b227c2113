"""sepacc: training-accuracy estimation for two-layer ReLU networks on
balanced random two-class data, from (d, N, L) alone.

The package implements a space-partitioning account of memorization: the
hidden layer's L hyperplanes cut R^d into S regions, N uniform points
fall into them like balls into bins, and the fraction of points that end
up alone in a region determines the achievable training accuracy through
a closed-form map.  Alongside the estimator it ships the exact
combinatorics, Monte Carlo simulators that validate them, a from-scratch
trainer for ground truth, and the fitting pipeline that recalibrates the
empirical coefficient table.
"""

from .estimate import ESTIMATE_MODES, Estimate, estimate_accuracy
from .geometry import (
    DEFAULT_MODEL,
    CoefficientModel,
    DimensionCoefficients,
    LayerWidths,
    coefficients_for_dimension,
    ensemble_index_empirical,
    ensemble_index_theoretical,
    max_partitions_approx,
    max_partitions_exact,
    multilayer_regions,
    plane_capacity,
)
from .rng import RngSeed
from .theory import (
    SATURATED_INDEX,
    ProblemSpec,
    expected_accuracy,
    expected_gamma,
    gamma_density,
    gamma_point_mass,
    invert_expected_accuracy,
    p_complete_exact,
    p_complete_limit,
    p_complete_stirling,
    p_incomplete_exact,
    p_incomplete_limit,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ESTIMATE_MODES",
    "Estimate",
    "estimate_accuracy",
    "DEFAULT_MODEL",
    "CoefficientModel",
    "DimensionCoefficients",
    "LayerWidths",
    "coefficients_for_dimension",
    "ensemble_index_empirical",
    "ensemble_index_theoretical",
    "max_partitions_approx",
    "max_partitions_exact",
    "multilayer_regions",
    "plane_capacity",
    "RngSeed",
    "SATURATED_INDEX",
    "ProblemSpec",
    "expected_accuracy",
    "expected_gamma",
    "gamma_density",
    "gamma_point_mass",
    "invert_expected_accuracy",
    "p_complete_exact",
    "p_complete_limit",
    "p_complete_stirling",
    "p_incomplete_exact",
    "p_incomplete_limit",
]
