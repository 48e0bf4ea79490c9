"""Differentially private robust estimators with finite-sample checks."""

from .distributions import (
    BoundedDiscrete,
    Contaminated,
    PointMass,
    SampleData,
    UniformShift,
    draw_sample,
    empirical_cdf,
    gc_distance,
    model_from_record,
    tv_distance,
)
from .errors import *  # noqa: F401,F403
from .functionals import (
    Linear,
    Mean,
    Median,
    Quantile,
    TrimmedMean,
    gamma_n,
    ges_rho,
    influence_rho,
)
from .mechanisms import (
    ExponentialMechanism,
    PlugIn,
    PrivateEstimate,
    SmoothLaplace,
    exp_mech_sample,
    laplace_draw,
    smooth_sensitivity_release,
)
from .mestimation import (
    CauchyPrior,
    ClippedShift,
    SignMedian,
    UniformPrior,
    estimate_sample_size,
    exp_mech_sample_size,
    ges_bound_from_smoothness,
    solve_m_estimator,
)
from .seeding import derive_rng
from .sensitivity import (
    PrivacyParams,
    local_sensitivity,
    smooth_sensitivity,
    smooth_sensitivity_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedDiscrete",
    "Contaminated",
    "PointMass",
    "SampleData",
    "UniformShift",
    "draw_sample",
    "empirical_cdf",
    "gc_distance",
    "model_from_record",
    "tv_distance",
    "ExponentialMechanism",
    "PlugIn",
    "PrivateEstimate",
    "SmoothLaplace",
    "exp_mech_sample",
    "laplace_draw",
    "smooth_sensitivity_release",
    "CauchyPrior",
    "ClippedShift",
    "SignMedian",
    "UniformPrior",
    "estimate_sample_size",
    "ges_bound_from_smoothness",
    "solve_m_estimator",
    "exp_mech_sample_size",
    "Linear",
    "Mean",
    "Median",
    "Quantile",
    "TrimmedMean",
    "gamma_n",
    "ges_rho",
    "influence_rho",
    "derive_rng",
    "PrivacyParams",
    "local_sensitivity",
    "smooth_sensitivity",
    "smooth_sensitivity_oracle",
]
