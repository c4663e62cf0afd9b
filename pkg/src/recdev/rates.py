"""Cumulant-style rate functions for the inter-record time and their transforms.

With Y the inter-record time, Lambda(lambda) = ln E e^(lambda Y) = ln f0(e^lambda)
for lambda < 0. Its derivative increases from 1 (lambda -> -inf) to +infinity
(lambda -> 0-), so Lambda' has an inverse G on (1, inf) and the Legendre
transform

    Lambda*(x) = sup_{lambda <= 0} (x lambda - Lambda(lambda))

is finite for x >= 1. The large-deviation rate of the record count at
fraction x of the horizon is x Lambda*(1/x); moderate-deviation constants
follow from the regular-variation parameters (alpha, c) of
(1 - s phi'(h(s)))/(1-s)^alpha -> c, available in closed form for
finite-variance laws (alpha = 1/2, c = sqrt(2) sigma) and for the stable
family (alpha = beta/(1+beta), c = gamma^(1/(1+beta)) (1+beta)^(beta/(1+beta))),
or by log-log regression otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import ladder, walk_model
from .errors import DomainError, FitFailedError, NoClosedFormError
from .walk_model import Kind, Side, StepLaw

__all__ = [
    "LAMBDA_MAX",
    "HSource",
    "HParams",
    "Regime",
    "RateResult",
    "lambda_eval",
    "g_inverse",
    "legendre",
    "ldp_rate",
    "mdp_rate",
    "assumption_h_exact",
    "assumption_h_fit",
    "tauberian_constant",
]

LAMBDA_MAX = -1e-12


class HSource(str, Enum):
    FINITE_VARIANCE = "finite_variance"
    STABLE_FAMILY = "stable_family"
    FITTED = "fitted"


@dataclass(frozen=True)
class HParams:
    """Regular-variation parameters: (1 - s phi'(h(s)))/(1-s)^alpha -> c."""

    alpha: float
    c: float
    source: HSource
    fit_r2: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} outside (0, 1)")
        if self.c <= 0.0:
            raise DomainError(f"c={self.c} must be positive")


class Regime(str, Enum):
    LDP = "LDP"
    MDP = "MDP"


@dataclass(frozen=True)
class RateResult:
    """A deviation rate constant together with the threshold scale it applies to.

    threshold_exponents = (a, b) describes thresholds x * n^a * c_n^b; the
    LDP regime has (1, 0), the MDP regime (1-alpha, alpha) on the right side
    and (alpha, 1-alpha) on the left.
    """

    value: float
    regime: Regime
    side: Side
    threshold_exponents: tuple


def _s_of_lambda(lam: float) -> float:
    return min(math.exp(lam), ladder.H_POINT_MAX_S)


def lambda_eval(law: StepLaw, lam: float, order: int = 0) -> float:
    """Lambda(lambda) (order 0) or Lambda'(lambda) (order 1) for lambda < 0.

    Order 1 uses the closed derivative formulas; the right-side denominator
    is factored through f0 = s((phi(h)-q) + q h)/h so nothing cancels as
    lambda -> -inf. Always Lambda < 0 and Lambda' > 1.
    """
    if lam > LAMBDA_MAX:
        raise DomainError(f"lambda={lam!r} must be <= {LAMBDA_MAX}")
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    s = _s_of_lambda(lam)
    h = ladder.h_point(law, s)
    q = law.q
    dphi = walk_model.pgf_eval(law, h, 1)
    u = 1.0 - s * dphi
    if law.side is Side.RIGHT:
        core = walk_model.pgf_minus_const(law, h) + q * h  # = h f0 / s
        if order == 0:
            return lam + math.log(core) - math.log(h)
        return q * (h * u + s * dphi) / (u * core)
    one_minus_phi = walk_model.pgf_one_minus(law, 1.0 - h)
    if order == 0:
        return lam + math.log(one_minus_phi) - math.log(1.0 - h)
    hp = (h / s) / u  # h'(s), with phi(h) = h/s
    return 1.0 + s * hp / (1.0 - h) - s * dphi * hp / one_minus_phi


@lru_cache(maxsize=1 << 18)
def g_inverse(law: StepLaw, x: float) -> float:
    """The lambda < 0 with Lambda'(lambda) = x, for x > 1.

    Geometrically expands the lower bracket until Lambda' falls below x,
    then runs Brent's method; the result is checked against the residual
    contract |Lambda'(lambda) - x| <= 1e-10 x.
    """
    if x <= 1.0:
        raise DomainError(f"x={x!r} must exceed 1")
    hi = LAMBDA_MAX
    if lambda_eval(law, hi, 1) <= x:
        raise DomainError(
            f"x={x!r} exceeds Lambda' at the pointwise domain edge lambda={hi}"
        )
    lo = -1.0
    while lambda_eval(law, lo, 1) >= x:
        lo *= 2.0
        if lo < -700.0:
            raise DomainError(f"no bracket for x={x!r}")
    lam = float(
        brentq(lambda t: lambda_eval(law, t, 1) - x, lo, hi, xtol=1e-30, rtol=1e-15)
    )
    if abs(lambda_eval(law, lam, 1) - x) > 1e-10 * x:
        lam = _bisect_g(law, x, lo, hi, lam)
    return lam


def _bisect_g(law: StepLaw, x: float, lo: float, hi: float, best: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = lambda_eval(law, mid, 1)
        if abs(v - x) <= 1e-10 * x:
            return mid
        if v < x:
            lo = mid
        else:
            hi = mid
    return best


@lru_cache(maxsize=1 << 18)
def legendre(law: StepLaw, x: float) -> float:
    """Legendre transform Lambda*(x) = sup_{lambda<=0} (x lambda - Lambda(lambda)).

    Piecewise: the supremum is attained at G(x) for x > 1, at lambda -> -inf
    for x = 1 (boundary constants -ln(q + p_0) on the right side, -ln(1 - q)
    on the left), and is +inf for x < 1.
    """
    if x <= 0.0:
        raise DomainError(f"x={x!r} must be positive")
    if x < 1.0:
        return math.inf
    if x == 1.0:
        if law.side is Side.RIGHT:
            return -math.log(law.q + walk_model.p_zero(law))
        return -math.log(1.0 - law.q)
    lam = g_inverse(law, x)
    return x * lam - lambda_eval(law, lam, 0)


def ldp_rate(law: StepLaw, x: float) -> RateResult:
    """Exponential decay rate of P(record count >= x n): x Lambda*(1/x).

    The record count cannot exceed n, so x > 1 yields an infinite rate.
    """
    if x <= 0.0:
        raise DomainError(f"x={x!r} must be positive")
    value = math.inf if x > 1.0 else x * legendre(law, 1.0 / x)
    return RateResult(value=value, regime=Regime.LDP, side=law.side, threshold_exponents=(1.0, 0.0))


def mdp_rate(law: StepLaw, x: float, hp: HParams | None = None) -> RateResult:
    """Moderate-deviation constant at threshold x n^a c_n^b.

    Right side: (alpha/(1-alpha)) (q/c)^(1/alpha) x^(1/alpha) with
    (a, b) = (1-alpha, alpha); left side:
    [c (1-alpha)^(2-alpha) alpha^alpha]^(1/(1-alpha)) x^(1/(1-alpha)) with
    (a, b) = (alpha, 1-alpha).
    """
    if x <= 0.0:
        raise DomainError(f"x={x!r} must be positive")
    if hp is None:
        hp = assumption_h_exact(law)
    a, c = hp.alpha, hp.c
    if law.side is Side.RIGHT:
        value = a / (1.0 - a) * (law.q / c) ** (1.0 / a) * x ** (1.0 / a)
        exponents = (1.0 - a, a)
    else:
        value = (c * (1.0 - a) ** (2.0 - a) * a**a) ** (1.0 / (1.0 - a)) * x ** (
            1.0 / (1.0 - a)
        )
        exponents = (a, 1.0 - a)
    return RateResult(value=value, regime=Regime.MDP, side=law.side, threshold_exponents=exponents)


def assumption_h_exact(law: StepLaw) -> HParams:
    """Closed-form (alpha, c): finite variance gives (1/2, sqrt(2) sigma),
    the stable family gives (beta/(1+beta), gamma^(1/(1+beta)) (1+beta)^(beta/(1+beta)))."""
    if law.kind is Kind.STABLE:
        g, b = law.gamma, law.beta
        return HParams(
            alpha=b / (1.0 + b),
            c=g ** (1.0 / (1.0 + b)) * (1.0 + b) ** (b / (1.0 + b)),
            source=HSource.STABLE_FAMILY,
        )
    if law.kind is Kind.FINITE:
        sigma2 = walk_model.pgf_eval(law, 1.0, 2)
        return HParams(alpha=0.5, c=math.sqrt(2.0 * sigma2), source=HSource.FINITE_VARIANCE)
    raise NoClosedFormError(f"no closed form for kind {law.kind!r}")


_FIT_GRID_J = np.arange(10, 39)  # 1 - s = 2^-j; beyond 2^-38 the root
# conditioning (residual tolerance 1e-14) contaminates the regression


def assumption_h_fit(law: StepLaw) -> HParams:
    """Estimate (alpha, c) by regressing ln(1 - s phi'(h(s))) on ln(1 - s)."""
    u = np.ldexp(1.0, -_FIT_GRID_J)
    ys = []
    for du in u:
        s = 1.0 - du
        h = ladder.h_point(law, s)
        ys.append(math.log(1.0 - s * walk_model.pgf_eval(law, h, 1)))
    xs = np.log(u)
    ys = np.asarray(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    if r2 < 0.999:
        raise FitFailedError(f"R^2 = {r2!r} below 0.999")
    return HParams(alpha=float(slope), c=math.exp(float(intercept)), source=HSource.FITTED, fit_r2=r2)


def tauberian_constant(law: StepLaw, hp: HParams | None = None) -> float:
    """Growth constant K of the summed return probabilities of the reflected chain.

    sum_{k<=n} P(chain at 0 after k steps) ~ K n^(1-alpha) on the right side
    with K = (1-alpha) c / (q Gamma(2-alpha)), and ~ K n^alpha on the left
    side with K = 1/((1-alpha) c Gamma(1+alpha)).
    """
    if hp is None:
        hp = assumption_h_exact(law)
    a, c = hp.alpha, hp.c
    if law.side is Side.RIGHT:
        return (1.0 - a) * c / (law.q * math.gamma(2.0 - a))
    return 1.0 / ((1.0 - a) * c * math.gamma(1.0 + a))
