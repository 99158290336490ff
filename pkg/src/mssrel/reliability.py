"""Closed-form s-out-of-k reliability for Pareto strength and stress.

Every summand of the double alternating sum depends on the shapes only
through ``a2 / (a1 * d + a2)`` with ``d = p + u``, so terms sharing the same
``d`` are merged into one exact integer coefficient before any floating
point work is done.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import CapacityError, NumericalError, ParameterDomainError

__all__ = [
    "MAX_K",
    "SystemSpec",
    "r_sk",
    "r_sk_oracle",
    "grad_r",
    "hess_r",
    "linex_w_bundle",
    "WBundle",
]

MAX_K = 30


@dataclass(frozen=True)
class SystemSpec:
    """An s-out-of-k system: it works while at least ``s`` of ``k`` components do."""

    s: int
    k: int

    def __post_init__(self):
        if int(self.s) != self.s or int(self.k) != self.k:
            raise ParameterDomainError("s and k must be integers")
        if not 1 <= self.s <= self.k:
            raise ParameterDomainError(f"need 1 <= s <= k, got s={self.s}, k={self.k}")
        if self.k > MAX_K:
            raise CapacityError(f"k={self.k} exceeds the supported maximum {MAX_K}")

    @classmethod
    def parse(cls, text: str) -> "SystemSpec":
        s, k = (int(v) for v in text.replace(";", ",").split(","))
        return cls(s, k)

    def __str__(self):
        return f"({self.s},{self.k})"


@lru_cache(maxsize=None)
def _coefficients(s: int, k: int):
    """Exact integer weights ``c_d`` of ``a2/(a1 d + a2)`` for d = s..k."""
    coef = {}
    for p in range(s, k + 1):
        for u in range(k - p + 1):
            d = p + u
            coef[d] = coef.get(d, 0) + (-1) ** u * math.comb(k, p) * math.comb(k - p, u)
    ds = sorted(d for d, c in coef.items() if c != 0)
    return np.array(ds, dtype=float), np.array([coef[d] for d in ds], dtype=float)


def _check_shapes(a1, a2):
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    if np.any(~(a1 > 0)) or np.any(~(a2 > 0)) or np.any(~np.isfinite(a1)) or np.any(~np.isfinite(a2)):
        raise ParameterDomainError("shape parameters must be finite and positive")
    return a1, a2


def _combine(terms, scalar):
    # terms has the d-axis last
    if scalar:
        return math.fsum(terms.ravel().tolist())
    return terms.sum(axis=-1)


def r_sk(a1, a2, spec: SystemSpec):
    """Reliability of the s-out-of-k system; broadcasts over array shapes."""
    a1, a2 = _check_shapes(a1, a2)
    scalar = a1.ndim == 0 and a2.ndim == 0
    d, c = _coefficients(spec.s, spec.k)
    a1e, a2e = a1[..., None], a2[..., None]
    return _combine(c * a2e / (a1e * d + a2e), scalar)


def r_sk_oracle(a1: float, a2: float, spec: SystemSpec, tol: float = 1e-12) -> float:
    """Direct quadrature of the defining integral.

    Substituting ``t = (theta/Y)**a2`` makes the stress uniform on (0, 1) and
    the strength survival ``t**(a1/a2)``; the binomial tail
    ``sum_p C(k,p) q**p (1-q)**(k-p)`` is then integrated over ``t``.
    """
    a1, a2 = (float(v) for v in _check_shapes(a1, a2))
    ratio = a1 / a2
    s, k = spec.s, spec.k
    binom = [math.comb(k, p) for p in range(k + 1)]

    def integrand(t):
        q = t ** ratio
        return sum(binom[p] * q ** p * (1.0 - q) ** (k - p) for p in range(s, k + 1))

    value, err = integrate.quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    if not np.isfinite(value) or err > 1e-9:
        raise NumericalError(f"quadrature did not converge (error estimate {err:.2e})", achieved=err)
    return value


def grad_r(a1, a2, spec: SystemSpec):
    """Partial derivatives ``(dR/da1, dR/da2)``."""
    a1, a2 = _check_shapes(a1, a2)
    scalar = a1.ndim == 0 and a2.ndim == 0
    d, c = _coefficients(spec.s, spec.k)
    a1e, a2e = a1[..., None], a2[..., None]
    den2 = (a1e * d + a2e) ** 2
    w1 = _combine(-c * a2e * d / den2, scalar)
    w2 = _combine(c * a1e * d / den2, scalar)
    return w1, w2


def hess_r(a1, a2, spec: SystemSpec):
    """Second partials ``(w11, w12, w22)``."""
    a1, a2 = _check_shapes(a1, a2)
    scalar = a1.ndim == 0 and a2.ndim == 0
    d, c = _coefficients(spec.s, spec.k)
    a1e, a2e = a1[..., None], a2[..., None]
    den3 = (a1e * d + a2e) ** 3
    w11 = _combine(c * 2.0 * a2e * d * d / den3, scalar)
    w12 = _combine(c * d * (a2e - a1e * d) / den3, scalar)
    w22 = _combine(-c * 2.0 * a1e * d / den3, scalar)
    return w11, w12, w22


class WBundle(NamedTuple):
    w: float
    w1: float
    w2: float
    w11: float
    w12: float
    w22: float


def linex_w_bundle(a1: float, a2: float, spec: SystemSpec, c: float) -> WBundle:
    """``exp(-c R)`` and its first and second partials in the shapes."""
    if c == 0 or not np.isfinite(c):
        raise ParameterDomainError("LINEX constant c must be a nonzero finite number")
    r = r_sk(a1, a2, spec)
    r1, r2 = grad_r(a1, a2, spec)
    r11, r12, r22 = hess_r(a1, a2, spec)
    w = math.exp(-c * r)
    return WBundle(
        w=w,
        w1=-c * w * r1,
        w2=-c * w * r2,
        w11=w * (c * c * r1 * r1 - c * r11),
        w12=w * (c * c * r1 * r2 - c * r12),
        w22=w * (c * c * r2 * r2 - c * r22),
    )
