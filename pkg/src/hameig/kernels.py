"""Green's kernels, boundary-influence functions and cone constants per component.

Dirichlet-at-zero (u(0) = lambda H, beta u'(1) + u(eta) = lambda G)::

    K(t,s) = t/(beta+eta) * (beta + (eta-s) 1[s<=eta]) - (t-s) 1[s<=t]
    psi0(t) = 1 - t/(beta+eta),   psi1(t) = t/(beta+eta)

Neumann-at-zero (u'(0) + lambda H = 0, beta u'(1) + u(eta) = lambda G)::

    K(t,s) = beta + (eta-s) 1[s<=eta] - (t-s) 1[s<=t]
    psi0(t) = beta + eta - t,     psi1(t) = 1

Constants are kept exact when the parameters are ``Fraction`` instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .problem import BcKind, ComponentParams

__all__ = [
    "KernelSet",
    "ConeConstants",
    "cone_constants",
    "kernel_set",
    "kernel_value",
    "psi0",
    "psi1",
    "phi_upper",
    "kernel_integral",
    "lipschitz_t",
]

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ConeConstants:
    c: Real
    c0: Real
    c1: Real
    c_tilde: Real


def cone_constants(kind: BcKind, params: ComponentParams) -> ConeConstants:
    beta, a, b = params.beta, params.a, params.b
    sigma = params.beta + params.eta
    if kind is BcKind.DIRICHLET0:
        denom = sigma if sigma >= HALF else 1 - sigma
        c = min(a * beta / denom, (sigma - b) / denom)
        c0 = 1 - b / sigma
        c1 = a
    else:
        c = (sigma - b) / sigma if sigma >= HALF else (sigma - b) / (1 - sigma)
        c0 = (sigma - b) / sigma
        c1 = Fraction(1) if isinstance(sigma, Fraction) else 1.0
    return ConeConstants(c, c0, c1, min(c, c0, c1))


@dataclass(frozen=True)
class KernelSet:
    kind: BcKind
    params: ComponentParams
    c: Real
    c0: Real
    c1: Real
    c_tilde: Real

    @property
    def beta(self) -> float:
        return float(self.params.beta)

    @property
    def eta(self) -> float:
        return float(self.params.eta)

    @property
    def sigma(self) -> float:
        return float(self.params.beta + self.params.eta)


def kernel_set(kind: BcKind, params: ComponentParams) -> KernelSet:
    k = cone_constants(kind, params)
    return KernelSet(kind, params, k.c, k.c0, k.c1, k.c_tilde)


def _check_unit(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} outside [0, 1]")
    return arr


def kernel_value(ks: KernelSet, t, s):
    """K(t, s); broadcasts over array arguments. Indicators are closed."""
    t = _check_unit("t", t)
    s = _check_unit("s", s)
    beta, eta, sigma = ks.beta, ks.eta, ks.sigma
    near = np.where(s <= eta, eta - s, 0.0)
    lag = np.where(s <= t, t - s, 0.0)
    if ks.kind is BcKind.DIRICHLET0:
        out = t / sigma * beta + t / sigma * near - lag
    else:
        out = beta + near - lag
    return out[()] if out.ndim == 0 else out


def psi0(ks: KernelSet, t):
    t = _check_unit("t", t)
    out = 1.0 - t / ks.sigma if ks.kind is BcKind.DIRICHLET0 else ks.sigma - t
    return out[()] if out.ndim == 0 else out


def psi1(ks: KernelSet, t):
    t = _check_unit("t", t)
    out = t / ks.sigma if ks.kind is BcKind.DIRICHLET0 else np.ones_like(t)
    return out[()] if out.ndim == 0 else out


def phi_upper(ks: KernelSet, s):
    """Upper envelope Phi(s) with K(t,s) <= Phi(s) for all t."""
    s = _check_unit("s", s)
    sigma = ks.sigma
    if ks.kind is BcKind.DIRICHLET0:
        out = s if sigma >= 0.5 else (1.0 - sigma) / sigma * s
    else:
        out = np.full_like(s, sigma if sigma >= 0.5 else 1.0 - sigma)
    return out[()] if out.ndim == 0 else out


def lipschitz_t(ks: KernelSet) -> float:
    """Bound on |dK/dt| over the unit square."""
    if ks.kind is BcKind.DIRICHLET0:
        return 1.0 + (ks.beta + ks.eta) / ks.sigma
    return 1.0


def kernel_integral(ks: KernelSet, t: float, lo: float, hi: float) -> float:
    """Exact integral of K(t, s) ds over [lo, hi].

    K is linear in s between the breakpoints eta and t, so Simpson's rule on
    each piece is exact.
    """
    if hi <= lo:
        return 0.0
    cuts = sorted({lo, hi, *(x for x in (ks.eta, t) if lo < x < hi)})
    total = 0.0
    for p, q in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (p + q)
        total += (q - p) / 6.0 * (
            kernel_value(ks, t, p) + 4.0 * kernel_value(ks, t, m) + kernel_value(ks, t, q)
        )
    return float(total)
