"""Gibbs and Metropolis-within-Gibbs posterior sampling for R_{s;k}."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .classical import IntervalEstimate, mle_unknown_theta
from .errors import ParameterDomainError, SupportViolationError
from .lindley import PriorConfig
from .pareto import RecordSample
from .reliability import SystemSpec, r_sk

__all__ = [
    "McmcConfig",
    "PosteriorChain",
    "gibbs_known_theta",
    "mh_within_gibbs",
    "theta_log_conditional",
    "point_sel",
    "point_linex",
    "hpd_interval",
]

CHAIN_COLUMNS = ("alpha1", "alpha2", "theta", "r")


@dataclass(frozen=True)
class McmcConfig:
    """Sampler settings. ``proposal_sd=None`` means 0.1 * min(r_1, s_1)."""

    T: int = 11000
    burn_in: int = 1000
    proposal_sd: Optional[float] = None
    seed: int = 0
    thinning: int = 1
    adapt: bool = True

    def __post_init__(self):
        if self.T < 1 or not 0 <= self.burn_in < self.T:
            raise ParameterDomainError("need 0 <= burn_in < T")
        if self.thinning < 1:
            raise ParameterDomainError("thinning must be >= 1")
        if self.proposal_sd is not None and not self.proposal_sd > 0:
            raise ParameterDomainError("proposal_sd must be positive")


@dataclass(frozen=True)
class PosteriorChain:
    """Retained draws, one row per kept sweep: alpha1, alpha2, theta, r."""

    draws: np.ndarray
    acceptance_rate: float = 1.0
    proposal_sd: Optional[float] = None
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        d = np.asarray(self.draws, dtype=float)
        if d.ndim != 2 or d.shape[1] != 4:
            raise ParameterDomainError("draws must be an (N, 4) array")
        d.setflags(write=False)
        object.__setattr__(self, "draws", d)

    def __len__(self):
        return self.draws.shape[0]

    @property
    def alpha1(self):
        return self.draws[:, 0]

    @property
    def alpha2(self):
        return self.draws[:, 1]

    @property
    def theta(self):
        return self.draws[:, 2]

    @property
    def r_values(self):
        return self.draws[:, 3]

    def to_csv(self, fh=None) -> Optional[str]:
        """Write one draw per line with a header; returns text when no file is given."""
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CHAIN_COLUMNS)
        for row in self.draws:
            writer.writerow([repr(float(v)) for v in row])
        return None if fh is not None else out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PosteriorChain":
        rows = list(csv.reader(io.StringIO(text)))
        if tuple(rows[0]) != CHAIN_COLUMNS:
            raise ParameterDomainError("unexpected chain header")
        return cls(np.array([[float(v) for v in r] for r in rows[1:]]))


def _retain(arr: np.ndarray, cfg: McmcConfig) -> np.ndarray:
    return arr[cfg.burn_in::cfg.thinning]


def gibbs_known_theta(rec_r: RecordSample, rec_s: RecordSample, theta: float,
                      prior: PriorConfig, spec: SystemSpec, cfg: McmcConfig = McmcConfig(),
                      rng: Optional[np.random.Generator] = None) -> PosteriorChain:
    """Both shape conditionals are gamma and independent of each other once
    theta is fixed, so every sweep is an exact independent draw."""
    if not theta > 0 or theta > min(rec_r.first, rec_s.first):
        raise SupportViolationError("theta must lie in (0, min(r_1, s_1)]")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    n, m = len(rec_r), len(rec_s)
    log_t = math.log(theta)
    rate1 = prior.b1 + rec_r.log_last - log_t
    rate2 = prior.b2 + rec_s.log_last - log_t
    a1 = rng.standard_gamma(n + prior.a1, size=cfg.T) / rate1
    a2 = rng.standard_gamma(m + prior.a2, size=cfg.T) / rate2
    a1, a2 = _retain(a1, cfg), _retain(a2, cfg)
    draws = np.column_stack([a1, a2, np.full(a1.size, float(theta)), r_sk(a1, a2, spec)])
    return PosteriorChain(draws, acceptance_rate=1.0)


def theta_log_conditional(theta, a1: float, a2: float, prior: PriorConfig, upper: float):
    """Unnormalised log density of theta given the shapes, on (0, upper)."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta > 0) & (theta < upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (a1 + a2 + prior.a3 - 1.0) * np.log(theta) - prior.b3 * theta
    return np.where(inside, val, -np.inf)


def mh_within_gibbs(rec_r: RecordSample, rec_s: RecordSample, prior: PriorConfig,
                    spec: SystemSpec, cfg: McmcConfig = McmcConfig(),
                    rng: Optional[np.random.Generator] = None) -> PosteriorChain:
    """Random-walk Metropolis for theta, then gamma draws for both shapes.

    Starts from the MLE with theta pulled to 0.99 * min(r_1, s_1). During
    burn-in the proposal scale is tuned toward 30-45% acceptance and then
    frozen.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    upper = min(rec_r.first, rec_s.first)
    n, m = len(rec_r), len(rec_s)
    lr_n, ls_m = rec_r.log_last, rec_s.log_last
    fit = mle_unknown_theta(rec_r, rec_s)
    sd = cfg.proposal_sd if cfg.proposal_sd is not None else 0.1 * upper

    T = cfg.T
    # pre-drawn streams; python floats keep the scalar loop fast
    steps = rng.standard_normal(T).tolist()
    log_u = np.log(rng.random(T)).tolist()
    g1 = rng.standard_gamma(n + prior.a1, size=T).tolist()
    g2 = rng.standard_gamma(m + prior.a2, size=T).tolist()

    a1, a2, th = fit.alpha1_hat, fit.alpha2_hat, 0.99 * upper
    expo_base = prior.a3 - 1.0
    b1, b2, b3 = prior.b1, prior.b2, prior.b3
    out_a1 = [0.0] * T
    out_a2 = [0.0] * T
    out_th = [0.0] * T
    accepted = 0
    window_acc = 0
    log_th = math.log(th)
    for t in range(T):
        prop = th + sd * steps[t]
        if 0.0 < prop < upper:
            log_prop = math.log(prop)
            log_ratio = (a1 + a2 + expo_base) * (log_prop - log_th) - b3 * (prop - th)
            if log_u[t] < log_ratio:
                th, log_th = prop, log_prop
                window_acc += 1
                if t >= cfg.burn_in:
                    accepted += 1
        a1 = g1[t] / (b1 + lr_n - log_th)
        a2 = g2[t] / (b2 + ls_m - log_th)
        out_a1[t], out_a2[t], out_th[t] = a1, a2, th
        if cfg.adapt and t < cfg.burn_in and (t + 1) % 100 == 0:
            rate = window_acc / 100.0
            if rate < 0.30:
                sd *= 0.8
            elif rate > 0.45:
                sd *= 1.25
            window_acc = 0

    out_a1, out_a2, out_th = np.array(out_a1), np.array(out_a2), np.array(out_th)
    keep_th = _retain(out_th, cfg)
    if not (np.all(keep_th > 0) and np.all(keep_th < upper)):
        raise AssertionError("theta draw left its support")
    ka1, ka2 = _retain(out_a1, cfg), _retain(out_a2, cfg)
    acc = accepted / (T - cfg.burn_in)
    notes = ()
    if not 0.05 <= acc <= 0.95:
        notes = (f"theta acceptance rate {acc:.3f} outside [0.05, 0.95]; retune proposal_sd",)
    draws = np.column_stack([ka1, ka2, keep_th, r_sk(ka1, ka2, spec)])
    return PosteriorChain(draws, acceptance_rate=acc, proposal_sd=sd, warnings=notes)


ChainLike = Union[PosteriorChain, np.ndarray]


def _r_values(chain: ChainLike) -> np.ndarray:
    r = chain.r_values if isinstance(chain, PosteriorChain) else np.asarray(chain, dtype=float).ravel()
    if r.size == 0:
        raise ParameterDomainError("empty chain")
    return r


def point_sel(chain: ChainLike) -> float:
    return float(np.mean(_r_values(chain)))


def point_linex(chain: ChainLike, c: float) -> float:
    if c == 0 or not np.isfinite(c):
        raise ParameterDomainError("LINEX constant c must be nonzero")
    r = _r_values(chain)
    return float(-(logsumexp(-c * r) - math.log(r.size)) / c)


def hpd_interval(chain: ChainLike, level: float = 0.95) -> IntervalEstimate:
    """Shortest window of sorted draws holding ``ceil(level * N)`` points."""
    if not 0 < level < 1:
        raise ParameterDomainError("level must lie in (0, 1)")
    r = np.sort(_r_values(chain))
    if r.size < 100:
        raise ParameterDomainError(f"HPD needs at least 100 draws, got {r.size}")
    # guard against 0.95 * 100 = 95.00000000000001
    w = int(math.ceil(level * r.size - 1e-9))
    widths = r[w - 1:] - r[: r.size - w + 1]
    j = int(np.argmin(widths))
    return IntervalEstimate.clamped(r[j], r[j + w - 1], level, "hpd")
