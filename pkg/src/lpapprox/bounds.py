"""Evaluators and solvers for the approximation lower and upper bounds.

Every existential constant appears as an explicit argument defaulting to 1.
Logarithms are natural; base changes are absorbed into those constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ProfileContractError, ValidationError


@dataclass
class RateResult:
    value: float
    regime: str
    constants: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {"value": self.value, "regime": self.regime, "constants": dict(self.constants)}


# --- profiles ----------------------------------------------------------------

@dataclass(frozen=True)
class ParametricPacking:
    """``log M(eps) = c0 * eps^-alpha`` for ``eps <= eps0``, and 0 above."""

    c0: float
    eps0: float
    alpha: float

    def __post_init__(self):
        if not (self.c0 > 0 and self.eps0 > 0 and self.alpha > 0):
            raise ValidationError("packing profile", "c0, eps0 and alpha must be positive")

    def __call__(self, eps):
        return self.c0 * eps ** (-self.alpha) if eps <= self.eps0 else 0.0


@dataclass
class BoundQuery:
    """Inputs of the implicit lower bound.

    ``packing`` is a :class:`ParametricPacking` or a callable ``eps -> log M``;
    ``fat`` is an integer pseudo-dimension ``P`` (constant profile) or a
    callable ``gamma -> fat_gamma``.  ``c`` is the Mendelson constant.
    """

    p: float
    a: float
    b: float
    packing: ParametricPacking | Callable
    fat: int | Callable
    c: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValidationError("range", "need a < b")
        if not self.c > 0:
            raise ValidationError("mendelson constant", "c must be positive")
        if not self.p >= 1:
            raise DomainError("p must be >= 1")
        if not callable(self.fat):
            if int(self.fat) != self.fat or self.fat < 1:
                raise ValidationError("pseudo-dimension", "P must be an integer >= 1")

    def fat_at(self, gamma):
        return self.fat(gamma) if callable(self.fat) else self.fat


def check_profiles(q, n=200):
    """Sample both profiles on a log grid and reject increasing behaviour."""
    grid = np.geomspace((q.b - q.a) * 1e-8, (q.b - q.a), n)
    if not isinstance(q.packing, ParametricPacking):
        vals = np.array([q.packing(e) for e in grid])
        if np.any(np.diff(vals) > 1e-12 * np.maximum(1.0, np.abs(vals[:-1]))):
            raise ProfileContractError("log M(eps) must be non-increasing in eps")
    if callable(q.fat):
        vals = np.array([q.fat(g / 32) for g in grid])
        if np.any(np.diff(vals) > 0):
            raise ProfileContractError("fat_gamma must be non-increasing in gamma")


# --- Mendelson right-hand side -------------------------------------------------

def mendelson_rhs(eps, fat, b_minus_a, c=1.0, p=None):
    """``c * fat * log^2(2 (b-a) fat / eps)`` with ``0 * log^2(0) = 0``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if fat < 0:
        raise DomainError("fat must be non-negative")
    if fat == 0:
        return 0.0
    return c * fat * math.log(2 * b_minus_a * fat / eps) ** 2


def _feasible(q, eps):
    lhs = q.packing(3 * eps)
    rhs = mendelson_rhs(eps, q.fat_at(eps / 32), q.b - q.a, q.c)
    return lhs <= rhs


def implicit_lower_bound(q, tol=1e-9, n_scan=4000, eps_min_rel=1e-30, check=True):
    """``inf{eps > 0 : log M(3 eps) <= c fat_{eps/32} log^2(2 (b-a) fat_{eps/32} / eps)}``.

    Any ``eps >= (b-a)/3`` solves the inequation, so the result never exceeds
    ``(b-a)/3``.  A log-spaced scan locates the first feasible grid point and
    bisection refines the bracket to ``tol``.
    """
    if check:
        check_profiles(q)
    top = (q.b - q.a) / 3
    grid = np.geomspace(top * eps_min_rel, top, n_scan)
    prev = 0.0
    for e in grid:
        if _feasible(q, e):
            break
        prev = e
    else:
        return top
    lo, hi = prev, e
    if lo == 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _feasible(q, mid):
            hi = mid
        else:
            lo = mid
    return min(hi, top)


def closed_form_lower_bound(P, alpha, c1=1.0, eps1=math.inf):
    """``min{eps1, c1 P^{-1/alpha} log^{-2/alpha} P}``; the second term is +inf at P = 1."""
    if P < 1:
        raise DomainError("P must be >= 1")
    if P == 1:
        term = math.inf
    else:
        term = c1 * P ** (-1.0 / alpha) * math.log(P) ** (-2.0 / alpha)
    value = min(eps1, term)
    regime = "P=1" if P == 1 else ("eps1" if eps1 <= term else "rate")
    return RateResult(value, regime, {"c1": c1, "eps1": eps1, "alpha": alpha})


# --- inequation solver ---------------------------------------------------------

def _aux(x, alpha, rP):
    """``f(x) = x^alpha / log^2(rPx)``."""
    return x ** alpha / math.log(rP * x) ** 2


def solve_inequation(c, alpha, r, P, rel_tol=1e-15):
    """Smallest ``eps in (0, r)`` with ``eps^-alpha <= c P log^2(rP/eps)``.

    With ``x = 1/eps`` the inequation reads ``f(x) <= cP`` where
    ``f(x) = x^alpha / log^2(rPx)`` is increasing on
    ``[max(1/r, e^{2/alpha}/(rP)), inf)`` and decreasing before, so the
    largest feasible ``x`` is the root of ``f = cP`` on that interval.
    Returns ``None`` when no ``eps`` in ``(0, r)`` qualifies.
    """
    if not (c > 0 and alpha > 0 and r > 0):
        raise DomainError("c, alpha and r must be positive")
    if P < 1 or int(P) != P:
        raise DomainError("P must be an integer >= 1")
    rP = r * P
    target = c * P
    x0 = max(1.0 / r, math.exp(2.0 / alpha) / rP)
    if rP * x0 <= 1.0:
        # only possible when P == 1 and x0 == 1/r: f blows up at x0
        x0 = math.nextafter(1.0 / r, math.inf)
    if _aux(x0, alpha, rP) > target:
        return None
    lo, hi = x0, 2.0 * x0
    while _aux(hi, alpha, rP) <= target:
        lo, hi = hi, hi * 2.0
    # geometric bisection on [lo, hi]: f(lo) <= target < f(hi)
    while hi - lo > rel_tol * lo:
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if _aux(mid, alpha, rP) <= target:
            lo = mid
        else:
            hi = mid
    return 1.0 / lo


def inequation_holds(eps, c, alpha, r, P):
    return eps ** (-alpha) <= c * P * math.log(r * P / eps) ** 2


# --- pseudo-dimension upper bounds -------------------------------------------

def pdim_upper_bound(W, L, nu, c1=1.0, c2=1.0, c3=1.0):
    """``c1 W^2`` (nu >= 2), ``c2 L W log W`` (nu = 1), ``c3 W log W`` (nu = 0)."""
    if W < 2:
        raise DomainError("W must be >= 2")
    if L < 1:
        raise DomainError("L must be >= 1")
    if nu < 0 or int(nu) != nu:
        raise DomainError("nu must be a non-negative integer")
    if nu >= 2:
        return RateResult(c1 * W ** 2, "nu>=2", {"c1": c1})
    if nu == 1:
        return RateResult(c2 * L * W * math.log(W), "nu=1", {"c2": c2})
    return RateResult(c3 * W * math.log(W), "nu=0", {"c3": c3})


# --- rate table -----------------------------------------------------------------

def _network_rate(alpha, W, L, nu, c1, c2, c3):
    """Lower bound for a packing exponent ``alpha`` and activation degree ``nu``."""
    lw = math.log(W)
    if nu >= 2:
        return RateResult(c1 * W ** (-2 / alpha) * lw ** (-2 / alpha), "nu>=2",
                          {"c1": c1, "alpha": alpha})
    if nu == 1:
        return RateResult(c2 * (L * W) ** (-1 / alpha) * lw ** (-3 / alpha), "nu=1",
                          {"c2": c2, "alpha": alpha})
    return RateResult(c3 * W ** (-1 / alpha) * lw ** (-3 / alpha), "nu=0",
                      {"c3": c3, "alpha": alpha})


def monotone_alpha(d, p):
    return max(d, (d - 1) * p)


def barron_alpha(d):
    return 1.0 / (0.5 + 1.0 / d)


def rate_table(cls, W, L=1, nu=0, d=1, p=1.0, s=1.0, gamma=None, c=1.0,
               c1=1.0, c2=1.0, c3=1.0):
    """Evaluate the rate formula of a function class at ``W`` weights and depth ``L``.

    ``cls`` is one of ``holder``, ``monotone_lower``, ``monotone_upper``,
    ``barron``.  Parameters outside a formula's validity window raise
    :class:`DomainError` naming the violated condition.
    """
    if not W > 1:
        raise DomainError("W must be > 1")
    if L < 1:
        raise DomainError("depth L must be >= 1")
    if cls == "holder":
        if not s > 0:
            raise DomainError("s must be positive")
        if gamma is None:
            raise DomainError("holder rate needs gamma in (s/d, 2s/d]")
        if not (s / d < gamma <= 2 * s / d):
            raise DomainError(f"gamma={gamma} outside (s/d, 2s/d] = ({s / d}, {2 * s / d}]")
        if nu > 1:
            raise DomainError("holder rate needs a piecewise-affine activation (nu <= 1)")
        if L > c * W ** (gamma * d / s - 1):
            raise DomainError("depth condition L <= c W^{gamma d/s - 1} violated")
        value = c1 * W ** (-gamma) * math.log(W) ** (-3 * s / d)
        return RateResult(value, "holder", {"c1": c1, "gamma": gamma, "s": s, "d": d})
    if cls == "monotone_lower":
        if d < 1 or not p >= 1:
            raise DomainError("need d >= 1 and p >= 1")
        res = _network_rate(monotone_alpha(d, p), W, L, nu, c1, c2, c3)
        res.regime = "monotone_lower:" + res.regime
        return res
    if cls == "monotone_upper":
        if d < 2:
            raise DomainError("monotone upper rate needs d >= 2")
        if not p >= 1:
            raise DomainError("p must be >= 1")
        alpha = monotone_alpha(d, p)
        if p * (d - 1) == d:
            return RateResult(c * W ** (-1 / d) * math.log(W), "monotone_upper:p(d-1)=d",
                              {"c": c, "alpha": alpha})
        return RateResult(c * W ** (-1 / alpha), "monotone_upper:p(d-1)!=d",
                          {"c": c, "alpha": alpha})
    if cls == "barron":
        if d < 1:
            raise DomainError("d must be >= 1")
        res = _network_rate(barron_alpha(d), W, L, nu, c1, c2, c3)
        res.regime = "barron:" + res.regime
        return res
    raise DomainError(f"unknown class {cls!r}")


def barron_log_packing(eps, d, c0=1.0):
    """``c0 eps^{-1/(1/2 + 1/d)}``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return c0 * eps ** (-barron_alpha(d))


def rate_exponent(cls, d=1, p=1.0, nu=0, s=1.0, gamma=None):
    """Polynomial exponent of ``W`` in the rate, ignoring log factors."""
    if cls == "holder":
        return -gamma
    if cls == "monotone_upper":
        return -1.0 / d if p * (d - 1) == d else -1.0 / monotone_alpha(d, p)
    alpha = monotone_alpha(d, p) if cls == "monotone_lower" else barron_alpha(d)
    return -2.0 / alpha if nu >= 2 else -1.0 / alpha
