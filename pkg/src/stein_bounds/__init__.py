"""Stein-kernel bounds on the Wasserstein-1 distance between nested univariate laws."""

__version__ = "0.1.0"

from .bayes import (
    DataSummary,
    PosteriorPair,
    Prior,
    SamplingModel,
    binomial_beta_closed_form,
    binomial_general_bound,
    binomial_jeffreys_closed_form,
    build_posteriors,
    normal_normal_closed_form,
    poisson_exponential_exact,
    poisson_general_bound,
    prior_impact_bounds,
    relaxed_bounds,
)
from .bounds import (
    BoundsResult,
    ConditionReport,
    Monotonicity,
    TiltSpec,
    bounds_theorem,
    check_conditions,
    compute_bounds,
    detect_monotone,
    exact_distance_monotone,
    tilt_distance_and_kl,
    tilt_distribution,
    variance_bound,
)
from .config import DEFAULT_CONFIG, QuadratureConfig, load_config
from .distributions import (
    Beta,
    Custom,
    Distribution,
    Exponential,
    Gamma,
    Normal,
    SkewNormal,
    SupportInterval,
    from_spec,
    make_catalog,
    make_custom,
)
from .errors import *  # noqa: F401,F403
from .oracle import OracleResult, oracle, oracle_cdf, oracle_quantile
from .stein import (
    LikelihoodRatio,
    SteinClassReport,
    SteinKernel,
    g_h_eval,
    inverse_stein_operator,
    likelihood_ratio,
    standardized_operator_apply,
    stein_class_report,
    stein_kernel,
    stein_operator_apply,
    verify_kernel_identity,
)
