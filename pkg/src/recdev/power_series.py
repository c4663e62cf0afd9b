"""Block-scaled truncated power series.

Every generating function in this package is a probability-like coefficient
sequence. Convolving such sequences hundreds of times produces tail masses
far below the double-precision underflow threshold (2^-1074), so a series
carries a single shared base-2 exponent next to a float64 mantissa vector:
semantic coefficient ``i`` equals ``coeffs[i] * 2**exponent2``. Within one
series only about 600 orders of magnitude survive the shared scaling; this
is acceptable because consumers read the dominant block (tail sums, leading
coefficients), never the sub-scale fringe.

Convolution is deliberately the naive O(N^2) kind with Kahan-compensated
accumulation per output slot: nonnegativity and round-off are easy to audit,
and desk-scale degrees (<= 10^4) do not justify transform methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadConstantTermError

__all__ = [
    "ScaledFloat",
    "ScaledSeries",
    "conv_multiply",
    "reciprocal_one_minus",
    "poly_apply",
    "binomial_power",
    "series_add",
    "series_subtract",
    "series_scale",
    "series_shift",
]

_LN2 = math.log(2.0)
_LOG10_2 = math.log10(2.0)


@dataclass(frozen=True)
class ScaledFloat:
    """A scalar ``mantissa * 2**exponent2`` with |mantissa| in [0.5, 1) or 0."""

    mantissa: float
    exponent2: int

    @staticmethod
    def from_parts(mantissa: float, exponent2: int) -> "ScaledFloat":
        if not math.isfinite(mantissa):
            raise ValueError("non-finite mantissa")
        if mantissa == 0.0:
            return ScaledFloat(0.0, 0)
        frac, e = math.frexp(mantissa)
        return ScaledFloat(frac, int(exponent2) + e)

    @staticmethod
    def from_float(x: float) -> "ScaledFloat":
        return ScaledFloat.from_parts(x, 0)

    @staticmethod
    def from_ln(ln_value: float) -> "ScaledFloat":
        """The positive scalar exp(ln_value), exact in the exponent part."""
        if ln_value == -math.inf:
            return ScaledFloat(0.0, 0)
        e = math.floor(ln_value / _LN2)
        return ScaledFloat.from_parts(math.exp(ln_value - e * _LN2), e)

    def to_float(self) -> float:
        """Collapse to a plain float; underflows to 0 beyond 2^-1074."""
        return math.ldexp(self.mantissa, self.exponent2)

    def ln(self) -> float:
        if self.mantissa < 0.0:
            raise ValueError("ln of a negative scaled value")
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(self.mantissa) + self.exponent2 * _LN2

    def decimal(self, digits: int = 12) -> str:
        """Decimal string, synthesized from logs when the value underflows."""
        if self.mantissa == 0.0:
            return "0"
        if abs(self.exponent2) < 960:
            return repr(self.to_float())
        l10 = self.exponent2 * _LOG10_2 + math.log10(abs(self.mantissa))
        e10 = math.floor(l10)
        lead = 10.0 ** (l10 - e10)
        if lead >= 10.0:  # rounding rollover
            lead /= 10.0
            e10 += 1
        sign = "-" if self.mantissa < 0 else ""
        return f"{sign}{lead:.{digits - 1}f}e{e10:+d}"


@dataclass(frozen=True)
class ScaledSeries:
    """Truncated power series with float64 mantissas and one shared exponent."""

    coeffs: np.ndarray
    exponent2: int

    @staticmethod
    def make(coeffs, exponent2: int = 0) -> "ScaledSeries":
        """Build a normalized series: max |mantissa| in [0.5, 1), or all-zero."""
        arr = np.array(coeffs, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        peak = float(np.max(np.abs(arr)))
        if not math.isfinite(peak):
            raise ValueError("non-finite coefficients")
        if peak == 0.0:
            exponent2 = 0
        else:
            _, e = math.frexp(peak)
            if e != 0:
                arr = np.ldexp(arr, -e)
                exponent2 = int(exponent2) + e
        arr.flags.writeable = False
        return ScaledSeries(arr, int(exponent2))

    @staticmethod
    def zero(degree: int) -> "ScaledSeries":
        return ScaledSeries.make(np.zeros(degree + 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return float(np.max(np.abs(self.coeffs))) == 0.0

    def values(self) -> np.ndarray:
        """Semantic coefficients as plain floats; may under/overflow."""
        return np.ldexp(self.coeffs, self.exponent2)

    def value(self, i: int) -> float:
        return math.ldexp(float(self.coeffs[i]), self.exponent2)

    def coefficient(self, i: int) -> ScaledFloat:
        return ScaledFloat.from_parts(float(self.coeffs[i]), self.exponent2)

    def padded(self, degree: int) -> "ScaledSeries":
        if degree <= self.degree:
            return self
        arr = np.zeros(degree + 1)
        arr[: len(self.coeffs)] = self.coeffs
        arr.flags.writeable = False
        return ScaledSeries(arr, self.exponent2)

    def truncated(self, degree: int) -> "ScaledSeries":
        if degree >= self.degree:
            return self.padded(degree)
        return ScaledSeries.make(self.coeffs[: degree + 1], self.exponent2)

    def horner(self, s: float) -> float:
        """Evaluate the semantic polynomial at s."""
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * s + c
        return math.ldexp(acc, self.exponent2)


def _compensated_convolve(a: np.ndarray, b: np.ndarray, n_out: int) -> np.ndarray:
    """c[k] = sum_j a[j] b[k-j] for k <= n_out, Kahan-compensated per slot.

    Iterates over the operand with fewer nonzero entries so sparse pmfs
    (e.g. period-2 laws) cost half.
    """
    nz_a = np.flatnonzero(a[: n_out + 1])
    nz_b = np.flatnonzero(b[: n_out + 1])
    if len(nz_a) > len(nz_b):
        a, b, nz_a = b, a, nz_b
    c = np.zeros(n_out + 1)
    comp = np.zeros(n_out + 1)
    blen = len(b)
    for j in nz_a:
        j = int(j)
        m = min(n_out - j, blen - 1)
        if m < 0:
            continue
        sl = slice(j, j + m + 1)
        term = a[j] * b[: m + 1]
        y = term - comp[sl]
        t = c[sl] + y
        comp[sl] = (t - c[sl]) - y
        c[sl] = t
    return c


def conv_multiply(a: ScaledSeries, b: ScaledSeries, n_out: int) -> ScaledSeries:
    """Product of two series truncated at degree ``n_out``."""
    if n_out < 0:
        raise ValueError("n_out must be >= 0")
    if a.is_zero() or b.is_zero():
        return ScaledSeries.zero(n_out)
    c = _compensated_convolve(a.coeffs, b.coeffs, n_out)
    return ScaledSeries.make(c, a.exponent2 + b.exponent2)


def reciprocal_one_minus(g: ScaledSeries, n_out: int) -> ScaledSeries:
    """Series of 1/(1 - g) for g with zero constant term.

    Coefficient recurrence a_0 = 1, a_n = sum_{j=1..n} g_j a_{n-j}. The input
    must be materializable as plain floats (all probability series here are).
    """
    if float(g.coeffs[0]) != 0.0:
        raise BadConstantTermError("reciprocal_one_minus requires g_0 = 0")
    gv = np.zeros(n_out + 1)
    upto = min(n_out, g.degree)
    gv[: upto + 1] = g.values()[: upto + 1]
    a = np.zeros(n_out + 1)
    a[0] = 1.0
    for n in range(1, n_out + 1):
        a[n] = float(np.dot(gv[1 : n + 1], a[n - 1 :: -1]))
    return ScaledSeries.make(a)


def poly_apply(outer_coeffs, inner: ScaledSeries, n_out: int) -> ScaledSeries:
    """Horner evaluation of sum_j outer[j] * inner^j truncated at ``n_out``.

    The inner constant term must vanish so truncation commutes with
    composition.
    """
    if float(inner.coeffs[0]) != 0.0:
        raise BadConstantTermError("poly_apply requires inner_0 = 0")
    outer = np.asarray(outer_coeffs, dtype=np.float64)
    if outer.ndim != 1 or outer.size == 0:
        raise ValueError("outer coefficients must be a nonempty 1-d sequence")
    start = np.zeros(n_out + 1)
    start[0] = outer[-1]
    result = ScaledSeries.make(start)
    for c in outer[-2::-1]:
        result = conv_multiply(result, inner, n_out)
        result = series_add(result, ScaledSeries.make(np.r_[c, np.zeros(n_out)]))
    return result.padded(n_out)


def binomial_power(g: ScaledSeries, mu: float, n_out: int) -> ScaledSeries:
    """Series of (1 - g)^mu for g with zero constant term.

    Uses the u' v = mu u v' coefficient recurrence (v = 1 - g), O(N^2).
    """
    if float(g.coeffs[0]) != 0.0:
        raise BadConstantTermError("binomial_power requires g_0 = 0")
    v = np.zeros(n_out + 1)
    v[0] = 1.0
    upto = min(n_out, g.degree)
    v[1 : upto + 1] = -g.values()[1 : upto + 1]
    w = v * np.arange(n_out + 1)
    u = np.zeros(n_out + 1)
    u[0] = 1.0
    for n in range(1, n_out + 1):
        rev = u[n - 1 :: -1]
        acc = (mu + 1.0) * float(np.dot(w[1 : n + 1], rev))
        acc -= n * float(np.dot(v[1 : n + 1], rev))
        u[n] = acc / n
    return ScaledSeries.make(u)


def series_add(a: ScaledSeries, b: ScaledSeries, n_out: int | None = None) -> ScaledSeries:
    """a + b, aligned to the larger shared exponent."""
    if n_out is None:
        n_out = max(a.degree, b.degree)
    e = max(a.exponent2, b.exponent2)
    va = np.zeros(n_out + 1)
    ua = min(n_out, a.degree)
    va[: ua + 1] = np.ldexp(a.coeffs[: ua + 1], a.exponent2 - e)
    ub = min(n_out, b.degree)
    va[: ub + 1] += np.ldexp(b.coeffs[: ub + 1], b.exponent2 - e)
    return ScaledSeries.make(va, e)


def series_subtract(a: ScaledSeries, b: ScaledSeries, n_out: int | None = None) -> ScaledSeries:
    return series_add(a, series_scale(b, -1.0), n_out)


def series_scale(a: ScaledSeries, factor: float) -> ScaledSeries:
    if factor == 0.0 or a.is_zero():
        return ScaledSeries.zero(a.degree)
    return ScaledSeries.make(a.coeffs * factor, a.exponent2)


def series_shift(a: ScaledSeries, k: int, n_out: int) -> ScaledSeries:
    """Multiply by s^k, truncating at degree ``n_out``."""
    if k < 0:
        raise ValueError("shift must be nonnegative")
    arr = np.zeros(n_out + 1)
    m = min(a.degree, n_out - k)
    if m >= 0:
        arr[k : k + m + 1] = a.coeffs[: m + 1]
    return ScaledSeries.make(arr, a.exponent2)
