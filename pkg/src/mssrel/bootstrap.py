"""Parametric bootstrap of the known-scale MLE of R_{s;k}."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import IntervalEstimate, MleFit, mle_r_sk, z_quantile
from .errors import DegenerateDistributionError, ParameterDomainError
from .pareto import record_block
from .reliability import SystemSpec, r_sk

__all__ = [
    "BootstrapSample",
    "boot_samples",
    "boot_normal_ci",
    "boot_percentile_ci",
    "boot_t_ci",
    "empirical_quantile",
]


@dataclass(frozen=True)
class BootstrapSample:
    estimates: np.ndarray
    point: float
    se_hat: float

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float).ravel()
        if est.size < 2:
            raise ParameterDomainError("a bootstrap sample needs B >= 2")
        est.setflags(write=False)
        object.__setattr__(self, "estimates", est)

    @classmethod
    def from_estimates(cls, estimates, point: float) -> "BootstrapSample":
        est = np.asarray(estimates, dtype=float)
        # a constant sample has spread exactly zero, not rounding noise
        se = 0.0 if np.ptp(est) == 0 else float(np.std(est, ddof=1))
        return cls(est, float(point), se)

    @property
    def B(self) -> int:
        return self.estimates.size


def empirical_quantile(x, q):
    """Linear interpolation between order statistics at h = (B-1) q + 1."""
    return np.quantile(np.asarray(x, dtype=float), q, method="linear")


def boot_samples(fit: MleFit, theta: float, spec: SystemSpec, B: int = 2000,
                 seed=0) -> BootstrapSample:
    """Redraw both record samples at the fitted shapes, refit, re-evaluate R.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if B < 2:
        raise ParameterDomainError("B must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    strength = record_block(fit.alpha1_hat, theta, fit.n, B, rng)
    stress = record_block(fit.alpha2_hat, theta, fit.m, B, rng)
    log_t = np.log(theta)
    a1_star = fit.n / (np.log(strength[:, -1]) - log_t)
    a2_star = fit.m / (np.log(stress[:, -1]) - log_t)
    return BootstrapSample.from_estimates(r_sk(a1_star, a2_star, spec), mle_r_sk(fit, spec))


def boot_normal_ci(bs: BootstrapSample, beta: float = 0.05) -> IntervalEstimate:
    half = z_quantile(beta) * bs.se_hat
    return IntervalEstimate.clamped(bs.point - half, bs.point + half, 1.0 - beta, "boot-normal")


def boot_percentile_ci(bs: BootstrapSample, beta: float = 0.05) -> IntervalEstimate:
    z_quantile(beta)
    lo, hi = empirical_quantile(bs.estimates, [beta / 2.0, 1.0 - beta / 2.0])
    return IntervalEstimate.clamped(lo, hi, 1.0 - beta, "boot-p")


def boot_t_ci(bs: BootstrapSample, beta: float = 0.05) -> IntervalEstimate:
    """Studentised interval with the bootstrap standard error standing in
    for every per-replicate standard error."""
    z_quantile(beta)
    if bs.B < 50:
        raise ParameterDomainError("boot-t needs at least 50 bootstrap replicates")
    if bs.se_hat <= 0:
        raise DegenerateDistributionError("bootstrap estimates have zero spread")
    t_star = (bs.estimates - bs.point) / bs.se_hat
    t_lo, t_hi = empirical_quantile(t_star, [beta / 2.0, 1.0 - beta / 2.0])
    return IntervalEstimate.clamped(bs.point - t_hi * bs.se_hat, bs.point - t_lo * bs.se_hat,
                                    1.0 - beta, "boot-t")
