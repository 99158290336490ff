"""Pareto primitives, upper-record sampling and goodness of fit."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientRecordsError, ParameterDomainError, SupportViolationError

__all__ = [
    "ParetoParams",
    "RecordSample",
    "pdf",
    "cdf",
    "quantile",
    "gen_records",
    "log_likelihood",
    "ks_statistic",
    "record_block",
]


@dataclass(frozen=True)
class ParetoParams:
    """Shape ``alpha`` and scale ``theta`` of a Pareto law on ``[theta, inf)``."""

    alpha: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterDomainError(f"alpha must be > 0, got {self.alpha!r}")
        if not (np.isfinite(self.theta) and self.theta > 0):
            raise ParameterDomainError(f"theta must be > 0, got {self.theta!r}")


@dataclass(frozen=True)
class RecordSample:
    """Strictly increasing upper record values.

    ``source`` optionally remembers the law the records were drawn from.
    Logarithms are computed once since every estimator reuses them.
    """

    values: np.ndarray
    source: Optional[ParetoParams] = None
    log_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size < 2:
            raise InsufficientRecordsError(
                f"a record sample needs at least 2 values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ParameterDomainError("record values must be finite and positive")
        if np.any(np.diff(vals) <= 0):
            raise ParameterDomainError("upper records must be strictly increasing")
        if self.source is not None and vals[0] < self.source.theta:
            raise SupportViolationError("first record lies below the declared scale")
        vals.setflags(write=False)
        logs = np.log(vals)
        logs.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "log_values", logs)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, RecordSample):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @property
    def first(self) -> float:
        return float(self.values[0])

    @property
    def last(self) -> float:
        return float(self.values[-1])

    @property
    def log_first(self) -> float:
        return float(self.log_values[0])

    @property
    def log_last(self) -> float:
        return float(self.log_values[-1])

    @property
    def log_sum(self) -> float:
        return float(self.log_values.sum())


def pdf(x, p: ParetoParams):
    """Density ``alpha * theta**alpha * x**-(alpha+1)`` on ``x >= theta``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = p.alpha / p.theta * (p.theta / x) ** (p.alpha + 1.0)
    out = np.where(x >= p.theta, dens, 0.0)
    return out if out.ndim else float(out)


def cdf(x, p: ParetoParams):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.expm1(p.alpha * np.log(p.theta / x))
    out = np.where(x >= p.theta, val, 0.0)
    return out if out.ndim else float(out)


def quantile(u, p: ParetoParams):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or np.any(~np.isfinite(u)):
        raise ParameterDomainError("quantile level must lie in (0, 1)")
    out = p.theta * np.exp(-np.log1p(-u) / p.alpha)
    return out if out.ndim else float(out)


def gen_records(p: ParetoParams, n: int, rng: np.random.Generator) -> RecordSample:
    """Draw the first ``n`` upper records of an i.i.d. Pareto sequence.

    ``log(X/theta)`` is exponential with rate ``alpha``; by memorylessness its
    upper records are partial sums of i.i.d. exponential increments, so the
    i-th record is ``theta * exp(G_i)`` with ``G_i ~ Gamma(i, alpha)``.
    """
    if int(n) != n or n < 2:
        raise ParameterDomainError(f"need n >= 2 records, got {n!r}")
    steps = rng.exponential(1.0 / p.alpha, size=int(n))
    return RecordSample(p.theta * np.exp(np.cumsum(steps)), source=p)


def record_block(alpha: float, theta: float, n: int, size: int,
                 rng: np.random.Generator) -> np.ndarray:
    """``size`` independent record sequences of length ``n`` as a (size, n) array.

    Row ``i`` consumes the stream exactly as the i-th of ``size`` successive
    :func:`gen_records` calls would.
    """
    steps = rng.exponential(1.0 / alpha, size=(int(size), int(n)))
    return theta * np.exp(np.cumsum(steps, axis=1))


def log_likelihood(a1: float, a2: float, theta: float,
                   rec_r: RecordSample, rec_s: RecordSample) -> float:
    """Joint record log-likelihood of strength and stress samples."""
    if a1 <= 0 or a2 <= 0:
        raise ParameterDomainError("shape parameters must be positive")
    # the boundary itself is allowed: the MLE of theta sits there
    if not (0 < theta <= min(rec_r.first, rec_s.first)):
        raise SupportViolationError(
            f"theta={theta!r} must lie in (0, min(r_1, s_1)]"
        )
    n, m = len(rec_r), len(rec_s)
    return (n * np.log(a1) + m * np.log(a2) + (a1 + a2) * np.log(theta)
            - a1 * rec_r.log_last - a2 * rec_s.log_last
            - rec_r.log_sum - rec_s.log_sum)


def ks_statistic(data: Sequence[float], p: ParetoParams) -> float:
    """Two-sided one-sample Kolmogorov-Smirnov distance to a Pareto law."""
    x = np.sort(np.asarray(data, dtype=float))
    if x.size == 0:
        raise ParameterDomainError("KS statistic needs at least one observation")
    n = x.size
    f = cdf(x, p)
    f = np.atleast_1d(f)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus))
