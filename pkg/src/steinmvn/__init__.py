"""Affine invariant tests for multivariate normality based on a weighted L2
distance between the gradient of the empirical characteristic function of
the scaled residuals and its value under normality.
"""

__version__ = "0.1.0"

from .competitors import bhep_stat, energy_stat, expected_norm_to_gaussian, hv_stat, hz_stat
from .errors import (
    AccuracyError,
    InvalidArgumentError,
    NumericOverflowError,
    ParseError,
    SingularCovarianceError,
    SteinMVNError,
    TooLargeForNaiveError,
    UnsupportedDimensionError,
)
from .inference import (
    ConfidenceInterval,
    DeltaValue,
    SigmaHatResult,
    confidence_interval,
    delta_limits,
    delta_numeric,
    helper_integrals,
    sigma_hat,
    sigma_hat_naive,
)
from .nulldist import (
    CumulantSet,
    SimulationConfig,
    cumulants_numeric,
    kernel_K,
    mc_critical_value,
    mc_pvalue,
    mean_limit,
    nystrom_eigenvalues,
)
from .quadrature import QuadratureSpec
from .samplers import AlternativeSpec, RngStream, cholesky_correlated, draw, parse_alternative
from .standardize import StandardizedSample, scaled_residuals
from .statistic import (
    TestOutcome,
    evaluate,
    limit_stat_inf,
    limit_stat_zero,
    scaled_stat,
    scaled_statistic,
    t_stat,
    t_stat_quadrature,
)
