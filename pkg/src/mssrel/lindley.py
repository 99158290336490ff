"""Lindley-approximated Bayes estimators of R_{s;k} under SEL and LINEX loss.

All derivative bundles are evaluated at the MLE. In the unknown-scale case
the MLE of theta sits on the edge of the parameter space, so the expansion
is a heuristic there; it is still what the method prescribes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classical import MleFit, mle_known_theta, mle_unknown_theta
from .errors import ApproximationBreakdownError, NumericalError, ParameterDomainError
from .pareto import RecordSample
from .reliability import SystemSpec, grad_r, hess_r, linex_w_bundle, r_sk

__all__ = [
    "PriorConfig",
    "Loss",
    "SEL",
    "LindleyTerms",
    "loglik_derivatives",
    "prior_log_gradient",
    "lindley_general",
    "lindley_estimate_3param",
    "lindley_estimate_2param",
]


@dataclass(frozen=True)
class PriorConfig:
    """Independent gamma priors (shape ``a``, rate ``b``) for alpha1, alpha2, theta."""

    a1: float
    b1: float
    a2: float
    b2: float
    a3: float = 1.0
    b3: float = 1.0

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2", "a3", "b3"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (np.isfinite(v) and v > 0):
                raise ParameterDomainError(f"prior {name} must be positive, got {v!r}")

    @classmethod
    def parse(cls, text: str) -> "PriorConfig":
        """Read the compact ``a1,a2[,a3]:b1,b2[,b3]`` form."""
        try:
            left, right = text.split(":")
            a = [float(v) for v in left.split(",")]
            b = [float(v) for v in right.split(",")]
        except ValueError as exc:
            raise ParameterDomainError(f"cannot parse prior {text!r}") from exc
        if len(a) != len(b) or len(a) not in (2, 3):
            raise ParameterDomainError("prior needs 2 or 3 shape/rate pairs")
        if len(a) == 2:
            return cls(a[0], b[0], a[1], b[1])
        return cls(a[0], b[0], a[1], b[1], a[2], b[2])

    @property
    def shapes(self):
        return (self.a1, self.a2, self.a3)

    @property
    def rates(self):
        return (self.b1, self.b2, self.b3)

    def compact(self) -> str:
        return "{},{},{}:{},{},{}".format(*self.shapes, *self.rates)


@dataclass(frozen=True)
class Loss:
    kind: str = "sel"
    c: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("sel", "linex"):
            raise ParameterDomainError(f"unknown loss {self.kind!r}")
        if self.kind == "linex" and (self.c is None or self.c == 0 or not np.isfinite(self.c)):
            raise ParameterDomainError("LINEX loss needs a nonzero constant c")

    @classmethod
    def linex(cls, c: float) -> "Loss":
        return cls("linex", float(c))

    @property
    def tag(self) -> str:
        return "sel" if self.kind == "sel" else f"linex({self.c:g})"


SEL = Loss()


@dataclass(frozen=True)
class LindleyTerms:
    """Second/third log-likelihood derivatives and prior gradient at the MLE."""

    lij: np.ndarray
    sigma: np.ndarray
    lijk: np.ndarray
    rho: np.ndarray
    point: np.ndarray


def prior_log_gradient(params: Sequence[float], prior: PriorConfig, mode: str = "unknown") -> np.ndarray:
    """``(a_j - 1)/lambda_j - b_j`` for each coordinate."""
    dim = _dim(mode)
    lam = np.asarray(params, dtype=float)[:dim]
    if lam.size != dim or np.any(lam <= 0):
        raise ParameterDomainError(f"need {dim} positive parameter values")
    a = np.array(prior.shapes[:dim])
    b = np.array(prior.rates[:dim])
    return (a - 1.0) / lam - b


def _dim(mode: str) -> int:
    if mode == "known":
        return 2
    if mode == "unknown":
        return 3
    raise ParameterDomainError(f"mode must be 'known' or 'unknown', got {mode!r}")


def loglik_derivatives(fit: MleFit, mode: Optional[str] = None,
                       prior: Optional[PriorConfig] = None) -> LindleyTerms:
    """Derivatives of the record log-likelihood at ``fit``.

    Every entry is differentiated directly from the log-likelihood:
    L111 = 2n/a1**3, L222 = 2m/a2**3, L33 = -(a1+a2)/theta**2,
    L133 = L233 = -1/theta**2 and L333 = 2(a1+a2)/theta**3.
    """
    if mode is None:
        mode = "unknown" if fit.theta_hat is not None else "known"
    dim = _dim(mode)
    a1, a2, th = fit.alpha1_hat, fit.alpha2_hat, fit.theta
    n, m = fit.n, fit.m
    lij = np.zeros((dim, dim))
    lijk = np.zeros((dim, dim, dim))
    lij[0, 0] = -n / a1**2
    lij[1, 1] = -m / a2**2
    # d^3/da^3 of n*log(a) is +2n/a^3
    lijk[0, 0, 0] = 2.0 * n / a1**3
    lijk[1, 1, 1] = 2.0 * m / a2**3
    if dim == 3:
        lij[0, 2] = lij[2, 0] = 1.0 / th
        lij[1, 2] = lij[2, 1] = 1.0 / th
        lij[2, 2] = -(a1 + a2) / th**2
        for i in (0, 1):
            for idx in ((i, 2, 2), (2, i, 2), (2, 2, i)):
                lijk[idx] = -1.0 / th**2
        lijk[2, 2, 2] = 2.0 * (a1 + a2) / th**3
        point = np.array([a1, a2, th])
    else:
        point = np.array([a1, a2])
    neg = -lij
    eig = np.linalg.eigvalsh(neg)
    if eig.min() <= 0:
        raise NumericalError(
            "negative Hessian of the log-likelihood is not positive definite at the MLE",
            achieved=float(eig.min()),
        )
    sigma = np.linalg.inv(neg)
    sigma = 0.5 * (sigma + sigma.T)
    rho = prior_log_gradient(point, prior, mode) if prior is not None else np.zeros(dim)
    return LindleyTerms(lij=lij, sigma=sigma, lijk=lijk, rho=rho, point=point)


def _w_bundle(a1, a2, spec, loss: Loss):
    if loss.kind == "sel":
        w = r_sk(a1, a2, spec)
        w1, w2 = grad_r(a1, a2, spec)
        w11, w12, w22 = hess_r(a1, a2, spec)
        return w, w1, w2, w11, w12, w22
    return tuple(linex_w_bundle(a1, a2, spec, loss.c))


def _finish(expectation: float, loss: Loss) -> float:
    if loss.kind == "sel":
        return expectation
    if expectation <= 0:
        raise ApproximationBreakdownError(
            f"approximated E[exp(-cR)] = {expectation:.4g} is not positive"
        )
    return -math.log(expectation) / loss.c


def lindley_general(w: float, grad: np.ndarray, hess: np.ndarray, terms: LindleyTerms) -> float:
    """Plain tensor form of the Lindley expansion (any dimension)."""
    sig, rho, l3 = terms.sigma, terms.rho, terms.lijk
    second = 0.5 * np.sum((hess + 2.0 * np.outer(grad, rho)) * sig)
    third = 0.5 * np.einsum("ijk,ij,kp,p->", l3, sig, sig, grad)
    return float(w + second + third)


def lindley_estimate_3param(rec_r: RecordSample, rec_s: RecordSample, prior: PriorConfig,
                            spec: SystemSpec, loss: Loss = SEL) -> float:
    """Bayes estimate with alpha1, alpha2 and theta all unknown.

    Uses the d_1..d_5 and A, B, C bookkeeping; w does not depend on theta so
    every w-derivative involving the third coordinate is zero.
    """
    fit = mle_unknown_theta(rec_r, rec_s)
    t = loglik_derivatives(fit, "unknown", prior)
    s, L, rho = t.sigma, t.lijk, t.rho
    w, w1, w2, w11, w12, w22 = _w_bundle(fit.alpha1_hat, fit.alpha2_hat, spec, loss)
    wv = np.array([w1, w2, 0.0])
    d = [rho @ s[i] for i in range(3)]
    d4 = w12 * s[0, 1]
    d5 = 0.5 * (w11 * s[0, 0] + w22 * s[1, 1])
    coef = []
    for k in range(3):
        coef.append(L[0, 0, k] * s[0, 0] + 2 * L[0, 1, k] * s[0, 1] + 2 * L[0, 2, k] * s[0, 2]
                    + 2 * L[1, 2, k] * s[1, 2] + L[1, 1, k] * s[1, 1] + L[2, 2, k] * s[2, 2])
    a_, b_, c_ = coef
    expectation = (w + (w1 * d[0] + w2 * d[1] + d4 + d5)
                   + 0.5 * (a_ * (wv @ s[0]) + b_ * (wv @ s[1]) + c_ * (wv @ s[2])))
    return _finish(float(expectation), loss)


def lindley_estimate_2param(rec_r: RecordSample, rec_s: RecordSample, theta: float,
                            prior: PriorConfig, spec: SystemSpec, loss: Loss = SEL) -> float:
    """Bayes estimate for known theta via the tau / Q reduction."""
    fit = mle_known_theta(rec_r, rec_s, theta)
    t = loglik_derivatives(fit, "known", prior)
    s, L, rho = t.sigma, t.lijk, t.rho
    w, w1, w2, w11, w12, w22 = _w_bundle(fit.alpha1_hat, fit.alpha2_hat, spec, loss)
    tau1 = rho[0] * s[0, 0] + rho[1] * s[0, 1]
    tau2 = rho[0] * s[1, 0] + rho[1] * s[1, 1]
    tau3 = 0.5 * (w11 * s[0, 0] + 2.0 * w12 * s[0, 1] + w22 * s[1, 1])
    q1 = L[0, 0, 0] * s[0, 0] + L[0, 1, 0] * s[0, 1] + L[1, 0, 0] * s[1, 0] + L[1, 1, 0] * s[1, 1]
    q2 = L[0, 0, 1] * s[0, 0] + L[0, 1, 1] * s[0, 1] + L[1, 0, 1] * s[1, 0] + L[1, 1, 1] * s[1, 1]
    expectation = (w + (w1 * tau1 + w2 * tau2 + tau3)
                   + 0.5 * (q1 * (w1 * s[0, 0] + w2 * s[0, 1]) + q2 * (w1 * s[1, 0] + w2 * s[1, 1])))
    return _finish(float(expectation), loss)
