"""Maximum likelihood, UMVUE and delta-method inference for R_{s;k}."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from .errors import ParameterDomainError, SupportViolationError
from .pareto import RecordSample
from .reliability import SystemSpec, _coefficients, grad_r, r_sk

__all__ = [
    "MleFit",
    "IntervalEstimate",
    "INTERVAL_METHODS",
    "mle_unknown_theta",
    "mle_known_theta",
    "mle_r_sk",
    "umvue_varphi",
    "umvue_r_sk",
    "asymptotic_variance",
    "asymptotic_ci",
    "z_quantile",
]

INTERVAL_METHODS = ("asymptotic", "boot-normal", "boot-p", "boot-t", "hpd")


@dataclass(frozen=True)
class MleFit:
    """Shape estimates plus the scale they were computed against.

    ``theta_hat`` is set when the scale was estimated; ``theta_known`` when it
    was supplied. Exactly one of the two is not None.
    """

    alpha1_hat: float
    alpha2_hat: float
    n: int
    m: int
    theta_hat: Optional[float] = None
    theta_known: Optional[float] = None

    def __post_init__(self):
        if not (self.alpha1_hat > 0 and self.alpha2_hat > 0):
            raise ParameterDomainError("fitted shapes must be positive")
        if (self.theta_hat is None) == (self.theta_known is None):
            raise ParameterDomainError("exactly one of theta_hat / theta_known must be given")

    @property
    def theta(self) -> float:
        return self.theta_hat if self.theta_hat is not None else self.theta_known


@dataclass(frozen=True)
class IntervalEstimate:
    """A two-sided interval.

    ``lower``/``upper`` are clamped to [0, 1]; ``raw_lower``/``raw_upper``
    keep the values before clamping (the reported interval lengths of
    simulation studies use the raw ones).
    """

    lower: float
    upper: float
    level: float
    method: str
    raw_lower: float
    raw_upper: float

    def __post_init__(self):
        if self.method not in INTERVAL_METHODS:
            raise ParameterDomainError(f"unknown interval method {self.method!r}")
        if not 0 < self.level < 1:
            raise ParameterDomainError("level must lie in (0, 1)")
        if self.lower > self.upper:
            raise ParameterDomainError("interval lower end exceeds upper end")

    @classmethod
    def clamped(cls, lo: float, hi: float, level: float, method: str) -> "IntervalEstimate":
        lo, hi = float(lo), float(hi)
        return cls(min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0), level, method, lo, hi)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def raw_width(self) -> float:
        return self.raw_upper - self.raw_lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def z_quantile(beta: float) -> float:
    """Upper ``1 - beta/2`` standard normal quantile."""
    if not 0 < beta < 1:
        raise ParameterDomainError("beta must lie in (0, 1)")
    return float(stats.norm.ppf(1.0 - beta / 2.0))


def mle_unknown_theta(rec_r: RecordSample, rec_s: RecordSample) -> MleFit:
    theta_hat = min(rec_r.first, rec_s.first)
    log_t = math.log(theta_hat)
    n, m = len(rec_r), len(rec_s)
    return MleFit(
        alpha1_hat=n / (rec_r.log_last - log_t),
        alpha2_hat=m / (rec_s.log_last - log_t),
        n=n,
        m=m,
        theta_hat=theta_hat,
    )


def mle_known_theta(rec_r: RecordSample, rec_s: RecordSample, theta: float) -> MleFit:
    if not theta > 0:
        raise ParameterDomainError("theta must be positive")
    if theta > min(rec_r.first, rec_s.first):
        raise SupportViolationError(
            f"theta={theta} exceeds the smallest first record {min(rec_r.first, rec_s.first)}"
        )
    log_t = math.log(theta)
    n, m = len(rec_r), len(rec_s)
    return MleFit(
        alpha1_hat=n / (rec_r.log_last - log_t),
        alpha2_hat=m / (rec_s.log_last - log_t),
        n=n,
        m=m,
        theta_known=float(theta),
    )


def mle_r_sk(fit: MleFit, spec: SystemSpec) -> float:
    return r_sk(fit.alpha1_hat, fit.alpha2_hat, spec)


def umvue_varphi(u1: float, u2: float, d: int, n: int, m: int) -> float:
    """UMVUE of ``a2 / (a1 d + a2)`` given the log last records over theta.

    Two series arise depending on whether ``u2`` lies below ``u1 / d``. The
    Gamma-function ratios are formed in log space because they overflow as
    plain factorials already for moderate ``n`` and ``m``.
    """
    if not (u1 > 0 and u2 > 0):
        raise ParameterDomainError("u1 and u2 must be positive")
    if d < 1 or n < 2 or m < 2:
        raise ParameterDomainError("need d >= 1 and n, m >= 2")
    base = special.gammaln(m) + special.gammaln(n)
    if u2 < u1 / d:
        log_x = math.log(d * u2 / u1)
        z = np.arange(n)
        logs = base - special.gammaln(m + z) - special.gammaln(n - z) + z * log_x
    else:
        log_y = math.log(u1 / (d * u2))
        z = np.arange(m - 1)
        logs = base - special.gammaln(n + z + 1) - special.gammaln(m - z - 1) + (z + 1) * log_y
    signs = np.where(z % 2 == 0, 1.0, -1.0)
    return math.fsum((signs * np.exp(logs)).tolist())


def umvue_r_sk(rec_r: RecordSample, rec_s: RecordSample, theta: float, spec: SystemSpec) -> float:
    """Unbiased estimate of R_{s;k} for known scale; deliberately not clamped."""
    if not theta > 0:
        raise ParameterDomainError("theta must be positive")
    if theta > min(rec_r.first, rec_s.first):
        raise SupportViolationError("theta exceeds the smallest first record")
    log_t = math.log(theta)
    u1 = rec_r.log_last - log_t
    u2 = rec_s.log_last - log_t
    n, m = len(rec_r), len(rec_s)
    ds, cs = _coefficients(spec.s, spec.k)
    return math.fsum(
        c * umvue_varphi(u1, u2, int(d), n, m) for d, c in zip(ds.tolist(), cs.tolist())
    )


def asymptotic_variance(fit: MleFit, spec: SystemSpec) -> float:
    """Delta-method variance from the diagonal Fisher information."""
    a1, a2 = fit.alpha1_hat, fit.alpha2_hat
    w1, w2 = grad_r(a1, a2, spec)
    return w1 * w1 * a1 * a1 / fit.n + w2 * w2 * a2 * a2 / fit.m


def asymptotic_ci(fit: MleFit, spec: SystemSpec, beta: float = 0.05) -> IntervalEstimate:
    """``R_hat -/+ z * sqrt(AV)``, clamped to [0, 1]."""
    z = z_quantile(beta)
    r_hat = mle_r_sk(fit, spec)
    half = z * math.sqrt(asymptotic_variance(fit, spec))
    return IntervalEstimate.clamped(r_hat - half, r_hat + half, 1.0 - beta, "asymptotic")
