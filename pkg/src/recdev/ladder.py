"""Minimal root h of x = s phi(x), ladder-epoch pgf f0, return probabilities.

h(s) is the smallest nonnegative root of x = s phi(x); it is the pgf of the
first-passage time of the reflected walk from level 1 to level 0. f0(s) is
the pgf of the first return time to 0 (the inter-record time Y):

    right-continuous side:  f0 = 1 + q s - q s / h(s)
    left-continuous side:   f0 = s (1 - phi(h)) / (1 - h) = 1 - (1-s)/(1-h)

and 1/(1 - f0) generates the n-step return probabilities of the reflected
chain to 0. Pointwise evaluation is capped at s = 1 - 1e-12: the root is
ill-conditioned at the endpoint (1 - h vanishes like a fractional power of
1 - s), so callers needing s -> 1 asymptotics use the rates module instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import walk_model
from .errors import DomainError
from .power_series import (
    ScaledSeries,
    binomial_power,
    conv_multiply,
    poly_apply,
    reciprocal_one_minus,
    series_add,
    series_scale,
    series_shift,
    series_subtract,
)
from .walk_model import Kind, Side, StepLaw

__all__ = [
    "H_POINT_MAX_S",
    "LadderGF",
    "h_point",
    "h_prime_point",
    "h_series",
    "f0_point",
    "f0_series",
    "return_prob_series",
    "build_ladder_gf",
]

H_POINT_MAX_S = 1.0 - 1e-12
_RESIDUAL_TOL = 1e-14
_SERIES_RESIDUAL_TOL = 1e-13


def h_point(law: StepLaw, s: float) -> float:
    """Minimal root of x = s phi(x) with |x - s phi(x)| <= 1e-14.

    Monotone fixed-point iterates from 0 converge upward to the minimal
    root; a Newton refinement from below (g(x) = s phi(x) - x is convex and
    has exactly one sign change on [0, 1]) takes over, and a bisection
    fallback certifies the residual if Newton stalls.
    """
    if not 0.0 <= s <= H_POINT_MAX_S:
        raise DomainError(f"s={s!r} outside [0, 1 - 1e-12]")
    if s == 0.0:
        return 0.0
    phi = walk_model.pgf_eval
    x = 0.0
    for _ in range(3):
        nxt = s * phi(law, x, 0)
        if nxt - x < 1e-15:
            x = nxt
            break
        x = nxt
    for _ in range(80):
        g = s * phi(law, x, 0) - x
        if abs(g) <= 0.5 * _RESIDUAL_TOL:
            break
        slope = s * phi(law, x, 1) - 1.0
        if slope >= 0.0:
            break
        nxt = x - g / slope
        if not (x < nxt < 1.0):
            break
        x = nxt
    if abs(s * phi(law, x, 0) - x) > _RESIDUAL_TOL:
        x = _bisect_root(law, s, x)
    return x


def _bisect_root(law: StepLaw, s: float, lo: float) -> float:
    # g(lo) >= 0 (approach from below), g(1) = s - 1 < 0
    if s * walk_model.pgf_eval(law, lo, 0) - lo < 0.0:
        lo = 0.0
    hi = 1.0
    x = lo
    for _ in range(200):
        x = 0.5 * (lo + hi)
        g = s * walk_model.pgf_eval(law, x, 0) - x
        if abs(g) <= _RESIDUAL_TOL:
            return x
        if g > 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= 1e-17:
            break
    return x


def h_prime_point(law: StepLaw, s: float) -> float:
    """h'(s) = phi(h)/(1 - s phi'(h)) for s in (0, 1-1e-12]."""
    if not 0.0 < s <= H_POINT_MAX_S:
        raise DomainError(f"s={s!r} outside (0, 1 - 1e-12]")
    h = h_point(law, s)
    return (h / s) / (1.0 - s * walk_model.pgf_eval(law, h, 1))


def _phi_of_series(law: StepLaw, inner: ScaledSeries, n_out: int) -> ScaledSeries:
    if law.kind is Kind.FINITE:
        return poly_apply(walk_model.pgf_coefficients(law, len(law.p) + 1), inner, n_out)
    pw = binomial_power(inner, 1.0 + law.beta, n_out)
    return series_add(inner.padded(n_out), series_scale(pw, law.gamma / (1.0 + law.beta)), n_out)


def _phi_prime_of_series(law: StepLaw, inner: ScaledSeries, n_out: int) -> ScaledSeries:
    if law.kind is Kind.FINITE:
        c = walk_model.pgf_coefficients(law, len(law.p) + 1)
        d = c[1:] * np.arange(1, len(c))
        return poly_apply(d, inner, n_out)
    pw = binomial_power(inner, law.beta, n_out)
    one = ScaledSeries.make(np.r_[1.0, np.zeros(n_out)])
    return series_subtract(one, series_scale(pw, law.gamma), n_out)


@lru_cache(maxsize=64)
def h_series(law: StepLaw, n_out: int) -> ScaledSeries:
    """Coefficients of h to degree n_out, satisfying h = s phi(h).

    Newton iteration on the series fixed point (correct degree doubles per
    step); the residual of the identity is asserted coefficient-wise at the
    end. The constant term is exactly zero and the linear term starts at q.
    """
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    h = ScaledSeries.make(np.r_[0.0, law.q, np.zeros(max(0, n_out - 1))]).truncated(
        min(1, n_out)
    )
    correct = 1
    while correct < n_out:
        target = min(2 * correct + 1, n_out)
        h = h.padded(target)
        sphi = series_shift(_phi_of_series(law, h, target), 1, target)
        f = series_subtract(h, sphi, target)
        sdphi = series_shift(_phi_prime_of_series(law, h, target), 1, target)
        recip = reciprocal_one_minus(sdphi, target)
        h = series_subtract(h, conv_multiply(f, recip, target), target)
        h = _force_zero_constant(h)
        correct = target
    residual = series_subtract(
        h, series_shift(_phi_of_series(law, h, n_out), 1, n_out), n_out
    )
    worst = float(np.max(np.abs(residual.values()))) if not residual.is_zero() else 0.0
    if worst > _SERIES_RESIDUAL_TOL:
        raise ArithmeticError(f"h series residual {worst:.3e} exceeds tolerance")
    return h


def _force_zero_constant(a: ScaledSeries) -> ScaledSeries:
    if float(a.coeffs[0]) == 0.0:
        return a
    arr = a.coeffs.copy()
    arr[0] = 0.0
    return ScaledSeries.make(arr, a.exponent2)


def f0_point(law: StepLaw, s: float) -> float:
    """Value of the inter-record-time pgf f0 at s in (0, 1 - 1e-12].

    The right-side formula is algebraically rearranged to
    s ((phi(h) - q) + q h) / h, which keeps all terms positive and avoids
    the 1 - qs/h cancellation for small s.
    """
    if not 0.0 < s <= H_POINT_MAX_S:
        raise DomainError(f"s={s!r} outside (0, 1 - 1e-12]")
    h = h_point(law, s)
    if law.side is Side.RIGHT:
        return s * (walk_model.pgf_minus_const(law, h) + law.q * h) / h
    return s * walk_model.pgf_one_minus(law, 1.0 - h) / (1.0 - h)


@lru_cache(maxsize=64)
def f0_series(law: StepLaw, n_out: int) -> ScaledSeries:
    """Coefficients of f0 to degree n_out (the pmf of the inter-record time).

    Right side: divide by h through the factorization h = s (h/s) whose
    constant term h/s -> q is invertible; left side: the equivalent identity
    f0 = 1 - (1-s)/(1-h). Constant terms come out exactly zero.
    """
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    if law.side is Side.RIGHT:
        h = h_series(law, n_out + 1)
        w = h.values()[1:]  # h/s, constant term h_1 = q
        if abs(w[0] - law.q) > 1e-12 * law.q:
            raise ArithmeticError("h series leading coefficient drifted from q")
        g = np.zeros(n_out + 1)
        g[1:] = -w[1 : n_out + 1] / law.q
        recip = reciprocal_one_minus(ScaledSeries.make(g), n_out)  # = q/w
        out = -recip.values()
        out[0] += 1.0
        out[1] += law.q
    else:
        h = h_series(law, n_out)
        r = reciprocal_one_minus(h, n_out).values()  # 1/(1-h)
        out = np.zeros(n_out + 1)
        out[1:] = r[:-1] - r[1:]
    out[0] = 0.0
    if float(np.min(out)) < -1e-12:
        raise ArithmeticError("f0 coefficients below the clamp tolerance")
    np.clip(out, 0.0, None, out=out)
    return ScaledSeries.make(out)


def return_prob_series(law: StepLaw, n_out: int) -> ScaledSeries:
    """Coefficient n is the n-step return probability of the reflected chain to 0."""
    return reciprocal_one_minus(f0_series(law, n_out), n_out)


@dataclass(frozen=True)
class LadderGF:
    """Bundle of the three ladder generating functions at one truncation."""

    law: StepLaw
    h: ScaledSeries
    f0: ScaledSeries
    returns: ScaledSeries


def build_ladder_gf(law: StepLaw, n_out: int) -> LadderGF:
    return LadderGF(
        law=law,
        h=h_series(law, n_out),
        f0=f0_series(law, n_out),
        returns=return_prob_series(law, n_out),
    )
