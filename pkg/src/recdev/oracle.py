"""Exact finite-horizon record-count distributions.

The record count up to time n equals the occupation time of the reflected
walk at level 0, a renewal count with inter-arrival law Y (pgf f0). The
tail P(count >= k) = P(Y_1 + ... + Y_k <= n) is computed by iterated
truncated convolution of the Y pmf in block-scaled arithmetic, so boundary
tails like 2^-n survive far below the float underflow threshold; an
explicit overflow bucket tracks the mass pushed beyond the horizon so total
mass stays auditable.

A joint dynamic program over (reflected level, zero count) cross-checks the
renewal route at small horizons, and level-capped chain DPs recompute the
first-return and first-passage pmfs independently of the series route.
Levels above the horizon are absorbed: a reflected level can only decrease
by one per step on the right side, so such paths cannot return within the
horizon, which makes the absorption exact for every statistic computed
here. The convolution chain is sequential in k and strictly deterministic;
no hidden parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ladder, rates, walk_model
from .errors import DomainError, HorizonTooLargeError
from .power_series import ScaledFloat, ScaledSeries, conv_multiply
from .walk_model import Side, StepLaw

__all__ = [
    "ORACLE_MAX_N",
    "OCCUPATION_MAX_N",
    "TailTable",
    "OccupationResult",
    "ConvergenceRow",
    "chain_transition_matrix",
    "first_return_dp",
    "first_passage_dp",
    "y_pmf",
    "record_tail_exact",
    "renewal_cdf_grid",
    "occupation_dp",
    "chernoff_bound",
    "convergence_table",
]

ORACLE_MAX_N = 10**4
OCCUPATION_MAX_N = 60
_DP_CROSSCHECK_DEGREE = 60
_DP_CROSSCHECK_TOL = 1e-12


@dataclass(frozen=True)
class TailTable:
    """Exact tails P(count >= k), k = 0..kmax, in mantissa/exponent form."""

    law: StepLaw
    n: int
    kmax: int
    mantissas: np.ndarray
    exponents: np.ndarray
    mass_defect: float  # worst |tail[k] + overflow[k] - 1| over the k range

    def tail(self, k: int) -> ScaledFloat:
        if k < 0:
            raise DomainError("k must be >= 0")
        if k > self.kmax:
            if k > self.n:
                return ScaledFloat(0.0, 0)
            raise DomainError(f"tail computed only up to kmax={self.kmax}")
        return ScaledFloat.from_parts(float(self.mantissas[k]), int(self.exponents[k]))

    def tail_float(self, k: int) -> float:
        return self.tail(k).to_float()

    def tail_floats(self) -> np.ndarray:
        return np.array([self.tail_float(k) for k in range(self.kmax + 1)])

    def pmf(self) -> list[ScaledFloat]:
        """P(count = k) for k = 0..n; requires the full k range."""
        if self.kmax != self.n:
            raise DomainError("pmf requires kmax == n")
        out = []
        for k in range(self.n + 1):
            hi = self.tail(k)
            lo = self.tail(k + 1)
            e = max(hi.exponent2, lo.exponent2)
            m = math.ldexp(hi.mantissa, hi.exponent2 - e) - math.ldexp(
                lo.mantissa, lo.exponent2 - e
            )
            out.append(ScaledFloat.from_parts(m, e))
        return out

    def pmf_floats(self) -> np.ndarray:
        return np.array([v.to_float() for v in self.pmf()])


@dataclass(frozen=True)
class OccupationResult:
    """Joint pmf of (reflected level, zero count) after n steps.

    ``joint[j, k]`` covers levels j = 0..n plus an absorbing overflow row at
    index n+1; ``pmf[k]`` is the level marginal, the exact law of the record
    count.
    """

    law: StepLaw
    n: int
    joint: np.ndarray
    pmf: np.ndarray


def chain_transition_matrix(law: StepLaw, levels: int, side: Side | None = None) -> np.ndarray:
    """Dense transition matrix of the reflected walk on {0..levels} + overflow.

    Row ``levels + 1`` is the absorbing overflow state for mass pushed above
    the level cap. ``side`` overrides the law's side, since both chain forms
    are defined by the same coefficient vector.
    """
    if side is None:
        side = law.side
    size = levels + 2
    over = levels + 1
    coeffs = walk_model.pgf_coefficients(law, levels + 2)
    q = coeffs[0]
    p = coeffs[1:]  # p[k] = p_k for k <= levels + 1
    pt_total = 1.0 - q
    cum = np.cumsum(p)
    t = np.zeros((size, size))
    if side is Side.RIGHT:
        # from 0: stay with p_0 + q, jump to k with p_k; from i >= 1: down one
        # with q, up k with p_k
        t[0, 0] = p[0] + q
        t[0, 1 : levels + 1] = p[1 : levels + 1]
        t[0, over] = max(0.0, pt_total - cum[levels])
        for i in range(1, levels + 1):
            t[i, i - 1] = q
            reach = levels - i
            t[i, i : levels + 1] = p[: reach + 1]
            t[i, over] = max(0.0, pt_total - cum[reach])
    else:
        # from i: up one with q, down to j with p_{i-j}, to 0 with the tail mass
        for i in range(levels + 1):
            if i + 1 <= levels:
                t[i, i + 1] = q
            else:
                t[i, over] = q
            if i >= 1:
                t[i, 1 : i + 1] = p[i - 1 :: -1]
                t[i, 0] = max(0.0, pt_total - cum[i - 1])
            else:
                t[i, 0] = pt_total
    t[over, over] = 1.0
    return t


def first_return_dp(law: StepLaw, n_out: int) -> np.ndarray:
    """pmf of the first return time of the reflected chain to 0 (taboo DP).

    Entry m is P(first return at step m), m = 1..n_out; entry 0 is 0.
    """
    t = chain_transition_matrix(law, n_out)
    f = np.zeros(n_out + 1)
    f[1] = t[0, 0]
    u = t[0, 1:].copy()  # taboo distribution over levels 1.. + overflow
    inner = t[1:, 1:]
    back = t[1:, 0]
    for m in range(2, n_out + 1):
        f[m] = float(np.dot(u, back))
        if m < n_out:
            u = u @ inner
    return f


def first_passage_dp(law: StepLaw, n_out: int) -> np.ndarray:
    """pmf of the first passage time from level 1 to 0 on the right-side chain.

    Levels >= 1 of the right-side chain are spatially homogeneous, which is
    what makes this pmf the coefficient sequence of h; h depends only on the
    pgf, so the right-side chain is used for laws of either side.
    """
    t = chain_transition_matrix(law, n_out, side=Side.RIGHT)
    f = np.zeros(n_out + 1)
    u = np.zeros(n_out + 1)
    u[0] = 1.0  # state index 0 here is level 1
    inner = t[1:, 1:]
    back = t[1:, 0]
    for m in range(1, n_out + 1):
        f[m] = float(np.dot(u, back))
        if m < n_out:
            u = u @ inner
    return f


def y_pmf(law: StepLaw, n_out: int) -> np.ndarray:
    """P(Y = m) for m = 0..n_out (entry 0 is 0), from the f0 coefficients.

    Recomputed independently by the taboo-state chain DP up to degree
    min(n_out, 60) and asserted equal within 1e-12; the two routes share no
    code path.
    """
    if n_out < 1:
        raise ValueError("n_out must be >= 1")
    y = ladder.f0_series(law, n_out).values()
    deg = min(n_out, _DP_CROSSCHECK_DEGREE)
    dp = first_return_dp(law, deg)
    gap = float(np.max(np.abs(y[: deg + 1] - dp)))
    if gap > _DP_CROSSCHECK_TOL:
        raise ArithmeticError(f"series/chain first-return mismatch {gap:.3e}")
    return y


def _renewal_stream(law: StepLaw, n: int, kmax: int):
    """Yield (k, pmf of Y_1+..+Y_k truncated at n, escaped mass) sequentially."""
    y_vals = y_pmf(law, n)
    y = ScaledSeries.make(y_vals)
    # P(Y > j): reversed cumulative sum plus the mass beyond the horizon
    beyond = max(0.0, 1.0 - math.fsum(y_vals))
    y_tail = np.concatenate([np.cumsum(y_vals[::-1])[::-1][1:], [0.0]]) + beyond
    y_tail_rev = y_tail[::-1].copy()  # index m -> P(Y > n - m)
    g = y
    escaped = beyond
    comp = 0.0
    yield 1, g, escaped
    for k in range(2, kmax + 1):
        step = math.ldexp(float(np.dot(g.coeffs, y_tail_rev)), g.exponent2)
        # Kahan accumulation of the escape mass
        t = escaped + (step - comp)
        comp = (t - escaped) - (step - comp)
        escaped = t
        g = conv_multiply(g, y, n)
        yield k, g, escaped


def record_tail_exact(law: StepLaw, n: int, kmax: int | None = None) -> TailTable:
    """Exact P(count >= k) = P(Y_1 + ... + Y_k <= n) for k = 0..kmax.

    O(n^2) per k. The mass defect audits tail[k] + escaped mass against 1.
    """
    if not 1 <= n <= ORACLE_MAX_N:
        raise HorizonTooLargeError(f"n={n} outside [1, {ORACLE_MAX_N}]")
    if kmax is None:
        kmax = n
    if not 0 <= kmax <= n:
        raise DomainError(f"kmax={kmax} outside [0, n]")
    mant = np.zeros(kmax + 1)
    expo = np.zeros(kmax + 1, dtype=np.int64)
    one = ScaledFloat.from_float(1.0)
    mant[0], expo[0] = one.mantissa, one.exponent2
    defect = 0.0
    for k, g, escaped in _renewal_stream(law, n, kmax):
        total = ScaledFloat.from_parts(math.fsum(g.coeffs), g.exponent2)
        mant[k], expo[k] = total.mantissa, total.exponent2
        defect = max(defect, abs(total.to_float() + escaped - 1.0))
    return TailTable(law=law, n=n, kmax=kmax, mantissas=mant, exponents=expo, mass_defect=defect)


def renewal_cdf_grid(law: StepLaw, n: int, kmax: int | None = None):
    """P(Y_1+..+Y_k <= m) for all k <= kmax, m <= n, in one sequential sweep.

    Returns (mantissa matrix of shape (kmax+1, n+1), per-row exponents); row
    k holds the cumulative sums of the k-fold pmf at the row's scale. Row 0
    is identically 1.
    """
    if not 1 <= n <= ORACLE_MAX_N:
        raise HorizonTooLargeError(f"n={n} outside [1, {ORACLE_MAX_N}]")
    if kmax is None:
        kmax = n
    mant = np.zeros((kmax + 1, n + 1))
    expo = np.zeros(kmax + 1, dtype=np.int64)
    mant[0] = 1.0
    for k, g, _ in _renewal_stream(law, n, kmax):
        mant[k] = np.cumsum(g.coeffs)
        expo[k] = g.exponent2
    return mant, expo


def occupation_dp(law: StepLaw, n: int) -> OccupationResult:
    """Joint pmf of (reflected level, zero count) by forward DP, n <= 60."""
    if not 1 <= n <= OCCUPATION_MAX_N:
        raise HorizonTooLargeError(f"n={n} outside [1, {OCCUPATION_MAX_N}]")
    t = chain_transition_matrix(law, n)
    tt = t.T.copy()
    joint = np.zeros((n + 2, n + 1))
    joint[0, 0] = 1.0
    for _ in range(n):
        joint = tt @ joint
        landed = joint[0].copy()
        joint[0] = 0.0
        joint[0, 1:] = landed[:-1]  # landing on 0 increments the count
    return OccupationResult(law=law, n=n, joint=joint, pmf=joint.sum(axis=0))


def chernoff_bound(law: StepLaw, n: int, k: int) -> ScaledFloat:
    """exp(-k Lambda*(n/k)), an upper bound on P(count >= k) for k <= n."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    return ScaledFloat.from_ln(-k * rates.legendre(law, n / k))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    k: int
    prob: ScaledFloat
    rate_estimate: float  # -ln P / n
    rate_limit: float


def convergence_table(law: StepLaw, x: float, n_list) -> list[ConvergenceRow]:
    """Exact P(count >= ceil(x n)) against the limiting rate, per horizon.

    Thresholds use the ceiling convention k = ceil(x n) (with a 1e-9 slack
    against float noise in x n), which makes the x = 1 boundary exact.
    """
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x={x!r} outside (0, 1]")
    limit = rates.ldp_rate(law, x).value
    rows = []
    for n in n_list:
        k = max(1, math.ceil(x * n - 1e-9))
        table = record_tail_exact(law, n, kmax=k)
        prob = table.tail(k)
        rows.append(
            ConvergenceRow(
                n=n, k=k, prob=prob, rate_estimate=-prob.ln() / n, rate_limit=limit
            )
        )
    return rows
