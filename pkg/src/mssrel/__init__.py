"""Multicomponent stress-strength reliability from Pareto upper record values."""
from .errors import (
    ApproximationBreakdownError,
    CapacityError,
    DegenerateDistributionError,
    InsufficientRecordsError,
    MssError,
    NumericalError,
    ParameterDomainError,
    SupportViolationError,
)
from .pareto import ParetoParams, RecordSample, cdf, gen_records, ks_statistic, pdf, quantile
from .reliability import SystemSpec, grad_r, hess_r, r_sk, r_sk_oracle
from .classical import (
    IntervalEstimate,
    MleFit,
    asymptotic_ci,
    mle_known_theta,
    mle_r_sk,
    mle_unknown_theta,
    umvue_r_sk,
)
from .lindley import SEL, Loss, PriorConfig, lindley_estimate_2param, lindley_estimate_3param
from .mcmc import McmcConfig, PosteriorChain, gibbs_known_theta, hpd_interval, mh_within_gibbs
from .bootstrap import BootstrapSample, boot_normal_ci, boot_percentile_ci, boot_samples, boot_t_ci

__version__ = "0.1.0"
