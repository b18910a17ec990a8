"""Intrinsic statistics of the projected normal distribution on the 2-sphere.

Simulate projected-normal data, compute Frechet means and intrinsic
covariances, and recover the generating normal's direction and variance
ratio by inverting the variance link function.
"""

from .estimator import (
    ConvergenceStudy,
    EstimationResult,
    FrechetMean,
    ProjectedNormalEstimator,
    StudyRow,
    convergence_study,
    estimate,
    rate_fit,
)
from .frechet import CovMatrix2, MeanResult, empirical_covariance, frechet_mean, transport_covariance
from .geometry import (
    AntipodalError,
    TangentBasis,
    TangentVector,
    canonical_basis,
    exp_map,
    from_spherical,
    geodesic_distance,
    log_map,
    parallel_transport,
    project,
    to_spherical,
)
from .link import (
    F_UPPER_BOUND,
    LinkTable,
    build_link_table,
    f_of_lambda,
    invert_f,
)
from .projnorm import (
    GeneralNormalParams,
    ProjNormParams,
    density,
    density_general,
    mills_ratio,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "AntipodalError",
    "ConvergenceStudy",
    "CovMatrix2",
    "EstimationResult",
    "F_UPPER_BOUND",
    "FrechetMean",
    "GeneralNormalParams",
    "LinkTable",
    "MeanResult",
    "ProjNormParams",
    "ProjectedNormalEstimator",
    "StudyRow",
    "TangentBasis",
    "TangentVector",
    "build_link_table",
    "canonical_basis",
    "convergence_study",
    "density",
    "density_general",
    "empirical_covariance",
    "estimate",
    "exp_map",
    "f_of_lambda",
    "frechet_mean",
    "from_spherical",
    "geodesic_distance",
    "invert_f",
    "log_map",
    "mills_ratio",
    "parallel_transport",
    "project",
    "rate_fit",
    "sample",
    "to_spherical",
    "transport_covariance",
]
