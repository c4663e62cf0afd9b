"""Runtime invariant suite behind the ``verify`` CLI command.

Each check is a named callable over a list of laws returning (ok, detail);
``run_suite`` executes a quick subset (< 1 min) or the full set (a few
minutes) and reports one line per check. These checks overlap the pytest
suite on purpose: they are the field diagnostic for user-supplied laws,
whereas the tests pin frozen expected values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ladder, montecarlo, oracle, power_series, rates, walk_model
from .walk_model import Side, StepLaw

__all__ = ["CheckResult", "run_suite", "default_laws", "DEFAULT_LAW_NAMES"]

DEFAULT_LAW_NAMES = [
    "ssrw_right",
    "ssrw_left",
    "skewed_right",
    "skewed_left",
    "stable:0.6:0.5:right",
    "stable:0.6:0.5:left",
]

_LN2 = math.log(2.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def default_laws() -> list[StepLaw]:
    return [walk_model.builtin_law(n) for n in DEFAULT_LAW_NAMES]


def _worst(pairs) -> float:
    return max(pairs, default=0.0)


def check_pgf_shape(laws):
    worst = 0.0
    for law in laws:
        grid = np.arange(0.0, 1.0, 0.01)
        d1 = np.array([walk_model.pgf_eval(law, s, 1) for s in grid])
        d2 = np.array([walk_model.pgf_eval(law, s, 2) for s in grid])
        if d1.min() < 0 or d2.min() < 0:
            return False, f"{law.describe()}: pgf not monotone convex"
        worst = max(worst, abs(walk_model.pgf_eval(law, 1.0, 0) - 1.0))
        if walk_model.pgf_eval(law, 0.0, 0) <= 0.0:
            return False, f"{law.describe()}: phi(0) not positive"
    return worst <= 1e-12, f"max |phi(1)-1| = {worst:.2e}"


def check_pgf_series_agreement(laws):
    worst = 0.0
    for law in laws:
        coeffs = power_series.ScaledSeries.make(walk_model.pgf_coefficients(law, 2000))
        for s in np.arange(0.0, 0.995, 0.03):
            worst = max(worst, abs(coeffs.horner(s) - walk_model.pgf_eval(law, s, 0)))
    return worst <= 1e-9, f"max |Horner - closed form| = {worst:.2e}"


def check_drift_equivalence(laws):
    for law in laws:
        crit = abs(walk_model.pgf_eval(law, 1.0, 1) - 1.0) <= 1e-9
        drift = abs(walk_model.mean_step(law)) <= 1e-9
        if crit != drift:
            return False, f"{law.describe()}: criticality/drift disagree"
    return True, "phi'(1)=1 iff E[X]=0 on all laws"


def check_series_algebra(_laws):
    rng = np.random.default_rng(20260810)
    worst = 0.0
    for _ in range(8):
        deg = int(rng.integers(8, 512))
        a = power_series.ScaledSeries.make(rng.random(deg + 1))
        b = power_series.ScaledSeries.make(rng.random(deg + 1))
        c = power_series.ScaledSeries.make(rng.random(deg + 1))
        ab = power_series.conv_multiply(a, b, deg)
        ba = power_series.conv_multiply(b, a, deg)
        worst = max(worst, _rel_gap(ab, ba))
        abc1 = power_series.conv_multiply(ab, c, deg)
        abc2 = power_series.conv_multiply(a, power_series.conv_multiply(b, c, deg), deg)
        worst = max(worst, _rel_gap(abc1, abc2))
        # mass conservation for sub-probability inputs
        pa = power_series.ScaledSeries.make(rng.random(deg + 1) / (deg + 1))
        pb = power_series.ScaledSeries.make(rng.random(deg + 1) / (deg + 1))
        prod = power_series.conv_multiply(pa, pb, 2 * deg)
        excess = math.fsum(prod.values()) - math.fsum(pa.values()) * math.fsum(pb.values())
        if excess > 1e-12:
            return False, f"mass conservation violated by {excess:.2e}"
        twice = power_series.ScaledSeries.make(a.coeffs, a.exponent2)
        if twice.exponent2 != a.exponent2 or not np.array_equal(twice.coeffs, a.coeffs):
            return False, "renormalization is not idempotent"
    return worst <= 1e-12, f"commutativity/associativity gap = {worst:.2e}"


def _rel_gap(a, b) -> float:
    va, vb = a.values(), b.values()
    scale = max(float(np.max(np.abs(va))), 1e-300)
    return float(np.max(np.abs(va - vb))) / scale


def check_reciprocal_identity(_laws):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(6):
        deg = int(rng.integers(4, 200))
        g_arr = rng.random(deg + 1)
        g_arr[0] = 0.0
        g_arr /= g_arr.sum() * 1.1  # sub-probability mass keeps 1/(1-g) bounded
        g = power_series.ScaledSeries.make(g_arr)
        rec = power_series.reciprocal_one_minus(g, deg)
        one_minus_g = power_series.series_subtract(
            power_series.ScaledSeries.make(np.r_[1.0, np.zeros(deg)]), g, deg
        )
        prod = power_series.conv_multiply(one_minus_g, rec, deg).values()
        prod[0] -= 1.0
        worst = max(worst, float(np.max(np.abs(prod))))
    return worst <= 1e-13, f"(1-g)/(1-g) residual = {worst:.2e}"


def check_h_fixed_point(laws):
    worst = 0.0
    for law in laws:
        prev = -1.0
        for s in np.linspace(0.01, 0.99, 99):
            h = ladder.h_point(law, s)
            worst = max(worst, abs(h - s * walk_model.pgf_eval(law, h, 0)))
            if h <= prev:
                return False, f"{law.describe()}: h not strictly increasing at s={s:.2f}"
            prev = h
    return worst <= 1e-13, f"max fixed-point residual = {worst:.2e}"


def check_h_series_identity(laws):
    worst_res, worst_lead = 0.0, 0.0
    for law in laws:
        h = ladder.h_series(law, 200)
        sphi = power_series.series_shift(
            ladder._phi_of_series(law, h, 200), 1, 200
        )
        res = power_series.series_subtract(h, sphi, 200)
        if not res.is_zero():
            worst_res = max(worst_res, float(np.max(np.abs(res.values()))))
        hv = h.values()
        worst_lead = max(worst_lead, abs(hv[1] - law.q))
        worst_lead = max(worst_lead, abs(hv[2] - walk_model.p_zero(law) * law.q))
    ok = worst_res <= 1e-13 and worst_lead <= 1e-13
    return ok, f"residual {worst_res:.2e}, leading-coefficient gap {worst_lead:.2e}"


def check_h_series_pointwise(laws):
    worst = 0.0
    for law in laws:
        h = ladder.h_series(law, 500)
        for s in np.arange(0.05, 0.905, 0.05):
            worst = max(worst, abs(h.horner(s) - ladder.h_point(law, s)))
    return worst <= 1e-10, f"series/pointwise gap = {worst:.2e}"


def check_f0_left_identity(laws):
    worst = 0.0
    for law in laws:
        if law.side is not Side.LEFT:
            continue
        deg = 200
        f0 = ladder.f0_series(law, deg)
        h = ladder.h_series(law, deg)
        one = power_series.ScaledSeries.make(np.r_[1.0, np.zeros(deg)])
        lhs = power_series.conv_multiply(
            power_series.series_subtract(one, f0, deg),
            power_series.series_subtract(one, h, deg),
            deg,
        ).values()
        lhs[0] -= 1.0
        lhs[1] += 1.0
        worst = max(worst, float(np.max(np.abs(lhs))))
    return worst <= 1e-12, f"(1-f0)(1-h)-(1-s) residual = {worst:.2e}"


def check_f0_sums(laws):
    for law in laws:
        sums = np.cumsum(ladder.f0_series(law, 400).values())
        if sums[-1] > 1.0 + 1e-12 or np.any(np.diff(sums) < -1e-15):
            return False, f"{law.describe()}: f0 partial sums not monotone within [0,1]"
    return True, "f0 partial sums nondecreasing, bounded by 1"


def check_f0_side_agreement(_laws):
    r = ladder.f0_series(walk_model.builtin_law("ssrw_right"), 200).values()
    l = ladder.f0_series(walk_model.builtin_law("ssrw_left"), 200).values()
    worst = float(np.max(np.abs(r - l)))
    return worst <= 1e-13, f"ssrw right/left f0 gap = {worst:.2e}"


def check_lambda_derivative(laws):
    worst_fd = 0.0
    for law in laws:
        grid = -np.exp(np.linspace(math.log(1e-6), math.log(10.0), 60))[::-1]
        vals = [rates.lambda_eval(law, lam, 1) for lam in grid]
        if np.any(np.diff(vals) <= 0):
            return False, f"{law.describe()}: Lambda' not strictly increasing"
        for lam in grid[::7]:
            d = 1e-4 * abs(lam)
            fd = (rates.lambda_eval(law, lam + d, 0) - rates.lambda_eval(law, lam - d, 0)) / (2 * d)
            an = rates.lambda_eval(law, lam, 1)
            worst_fd = max(worst_fd, abs(fd - an) / abs(an))
        if abs(rates.lambda_eval(law, -20.0, 1) - 1.0) > 1e-3:
            return False, f"{law.describe()}: Lambda'(-20) far from 1"
        limit = -30.0 - rates.lambda_eval(law, -30.0, 0)
        if law.side is Side.RIGHT:
            target = -math.log(law.q + walk_model.p_zero(law))
        else:
            target = -math.log(1.0 - law.q)
        if abs(limit - target) > 1e-3:
            return False, f"{law.describe()}: lambda - Lambda limit off by {limit - target:.2e}"
    return worst_fd <= 1e-6, f"analytic/finite-difference gap = {worst_fd:.2e}"


def check_legendre_duality(laws):
    rng = np.random.default_rng(11)
    worst_eq = 0.0
    for law in laws:
        for x in (1.3, 2.0, 5.0, 40.0):
            star = rates.legendre(law, x)
            for lam in -np.exp(rng.uniform(math.log(1e-6), math.log(30.0), 20)):
                if x * lam - rates.lambda_eval(law, lam, 0) > star + 1e-12:
                    return False, f"{law.describe()}: duality violated at x={x}"
            lam_star = rates.g_inverse(law, x)
            worst_eq = max(
                worst_eq, abs(star - (x * lam_star - rates.lambda_eval(law, lam_star, 0)))
            )
    return worst_eq <= 1e-9, f"supremum attainment gap = {worst_eq:.2e}"


def check_legendre_boundary(laws):
    for law in laws:
        const = rates.legendre(law, 1.0)
        vals = [rates.legendre(law, 1.0 + 10.0**-k) for k in range(2, 7)]
        gaps = [abs(v - const) for v in vals]
        if np.any(np.diff(gaps) > 0):
            return False, f"{law.describe()}: boundary approach not monotone"
        if gaps[-1] > 1e-3:
            return False, f"{law.describe()}: boundary gap {gaps[-1]:.2e}"
    return True, "Legendre values approach the x=1 constant monotonically"


def check_corollary_identity(_laws):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        g, b = rng.uniform(0.05, 0.95, 2)
        x = rng.uniform(0.1, 3.0)
        law_r = walk_model.builtin_law(f"stable:{g}:{b}:right")
        law_l = walk_model.builtin_law(f"stable:{g}:{b}:left")
        right = rates.mdp_rate(law_r, x).value
        left = rates.mdp_rate(law_l, x).value
        exp_r = b * g / (1.0 + b) ** (2.0 + 1.0 / b) * x ** (1.0 + 1.0 / b)
        exp_l = g * b**b / (1.0 + b) ** (2.0 + b) * x ** (1.0 + b)
        worst = max(worst, abs(right - exp_r) / exp_r, abs(left - exp_l) / exp_l)
        law = _random_finite_law(rng)
        sigma2 = walk_model.pgf_eval(law, 1.0, 2)
        expect = (
            law.q**2 * x**2 / (2 * sigma2)
            if law.side is Side.RIGHT
            else sigma2 * x**2 / 8.0
        )
        got = rates.mdp_rate(law, x).value
        worst = max(worst, abs(got - expect) / expect)
    return worst <= 1e-10, f"theorem/corollary relative gap = {worst:.2e}"


def _random_finite_law(rng) -> StepLaw:
    k = int(rng.integers(1, 6))
    w = rng.random(k + 1)
    w[int(rng.integers(1, k + 1))] += 0.5
    scale = math.fsum((n + 1) * v for n, v in enumerate(w))
    p = [v / scale for v in w]
    side = Side.RIGHT if rng.random() < 0.5 else Side.LEFT
    return walk_model.validate_law(
        {"side": side.value, "kind": "finite", "q": 1.0 - math.fsum(p), "p": p}
    )


def check_mdp_emergence(laws):
    worst = 0.0
    for law in laws:
        if law.side is not Side.RIGHT:
            continue
        hp = rates.assumption_h_exact(law)
        n = 10**8
        cn = n**0.4
        k = math.ceil(n ** (1.0 - hp.alpha) * cn**hp.alpha)
        emergent = k * rates.legendre(law, n / k) / cn
        target = rates.mdp_rate(law, 1.0, hp).value
        worst = max(worst, abs(emergent - target) / target)
    return worst <= 0.05, f"Legendre-route MDP constant gap = {worst:.2%}"


def check_oracle_duality(laws):
    worst = 0.0
    for law in laws:
        f0 = ladder.f0_series(law, 60).values()
        worst = max(worst, float(np.max(np.abs(f0 - oracle.first_return_dp(law, 60)))))
        h = ladder.h_series(law, 60).values()
        worst = max(worst, float(np.max(np.abs(h - oracle.first_passage_dp(law, 60)))))
    return worst <= 1e-12, f"series/DP duality gap = {worst:.2e}"


def check_oracle_tables(laws):
    def ln_tail(mant, expo, k, n):
        m = mant[k, n]
        return -math.inf if m == 0.0 else math.log(m) + float(expo[k]) * _LN2

    for law in laws:
        mant, expo = oracle.renewal_cdf_grid(law, 120, 120)
        table = oracle.record_tail_exact(law, 60)
        pmf = table.pmf_floats()
        occ = oracle.occupation_dp(law, 60)
        if float(np.max(np.abs(occ.pmf - pmf))) > 1e-12:
            return False, f"{law.describe()}: occupation/renewal pmf mismatch"
        if abs(math.fsum(pmf) - 1.0) > 1e-10:
            return False, f"{law.describe()}: pmf mass {math.fsum(pmf)!r}"
        if table.mass_defect > 1e-12:
            return False, f"{law.describe()}: mass defect {table.mass_defect:.2e}"
        tails = table.tail_floats()
        if np.any(np.diff(tails) > 1e-15):
            return False, f"{law.describe()}: tail not nonincreasing in k"
        for k in (1, 5, 20, 60):
            # mantissas share the row exponent, so row monotonicity in n is direct
            if np.any(np.diff(mant[k, k:]) < -1e-15):
                return False, f"{law.describe()}: tail not nondecreasing in n"
        for x in (0.25, 0.5, 0.75, 1.0):
            for n in (10, 50, 100):
                lo = math.ceil(x * n - 1e-9)
                hi = max(1, math.floor(x * n + 1e-9))
                if ln_tail(mant, expo, lo, n) > ln_tail(mant, expo, hi, n) + 1e-12:
                    return False, f"{law.describe()}: sandwich ordering violated"
    return True, "pmf mass, monotonicity, occupation cross-check, mass audit"


def check_chernoff(laws, n_max: int):
    worst = -math.inf
    slack = math.log1p(1e-9)
    for law in laws:
        mant, expo = oracle.renewal_cdf_grid(law, n_max, n_max)
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                m = mant[k, n]
                if m == 0.0:
                    continue
                gap = (math.log(m) + float(expo[k]) * _LN2) + k * rates.legendre(law, n / k)
                worst = max(worst, gap)
                if gap > slack:
                    return False, f"{law.describe()}: bound violated at n={n}, k={k}"
    return True, f"worst ln(tail/bound) = {worst:.2e} over n <= {n_max}"


def check_montecarlo(laws, paths: int):
    for law in laws:
        cfg = montecarlo.SimConfig(law=law, n=50, paths=paths, seed=20260810, workers=1)
        res = montecarlo.run_simulation(cfg)
        if res.violations:
            return False, f"{law.describe()}: {res.violations} path-identity violations"
        if int(res.histogram.sum()) != paths:
            return False, f"{law.describe()}: histogram mass mismatch"
        cfg2 = montecarlo.SimConfig(law=law, n=50, paths=paths, seed=20260810, workers=4)
        if not np.array_equal(montecarlo.run_simulation(cfg2).histogram, res.histogram):
            return False, f"{law.describe()}: worker count changed the histogram"
    return True, f"identity + determinism over {paths} paths per law"


def check_coverage(_laws):
    law = walk_model.builtin_law("ssrw_right")
    n, paths, k = 30, 4000, 9
    exact = oracle.record_tail_exact(law, n, kmax=k).tail_float(k)
    covered = 0
    reps = 200
    for rep in range(reps):
        cfg = montecarlo.SimConfig(law=law, n=n, paths=paths, seed=10_000 + rep)
        est = montecarlo.estimate_tail(cfg, k)
        covered += est.lower <= exact <= est.upper
    return covered >= 0.90 * reps, f"CI covered the exact tail in {covered}/{reps} runs"


def check_tauberian(laws):
    for law, tol in [(walk_model.builtin_law("ssrw_right"), 0.02),
                     (walk_model.builtin_law("stable:0.6:0.5:right"), 0.03),
                     (walk_model.builtin_law("ssrw_left"), 0.02)]:
        n = 10**4
        hp = rates.assumption_h_exact(law)
        total = math.fsum(ladder.return_prob_series(law, n).values())
        power = 1.0 - hp.alpha if law.side is Side.RIGHT else hp.alpha
        pred = rates.tauberian_constant(law, hp) * n**power
        if abs(total - pred) / pred > tol:
            return False, f"{law.describe()}: occupation sum off by {abs(total-pred)/pred:.2%}"
    return True, "occupation sums match the singularity constants"


_CHECKS: list[tuple[str, bool, Callable]] = [
    ("pgf-shape", True, check_pgf_shape),
    ("pgf-series-agreement", True, check_pgf_series_agreement),
    ("drift-equivalence", True, check_drift_equivalence),
    ("series-algebra", True, check_series_algebra),
    ("series-reciprocal", True, check_reciprocal_identity),
    ("ladder-fixed-point", True, check_h_fixed_point),
    ("ladder-series-identity", True, check_h_series_identity),
    ("ladder-series-pointwise", True, check_h_series_pointwise),
    ("ladder-left-identity", True, check_f0_left_identity),
    ("ladder-f0-mass", True, check_f0_sums),
    ("ladder-side-agreement", True, check_f0_side_agreement),
    ("rates-derivative", True, check_lambda_derivative),
    ("rates-duality", True, check_legendre_duality),
    ("rates-boundary", True, check_legendre_boundary),
    ("rates-corollary-identity", True, check_corollary_identity),
    ("rates-mdp-emergence", True, check_mdp_emergence),
    ("oracle-duality", True, check_oracle_duality),
    ("oracle-tables", True, check_oracle_tables),
    ("oracle-chernoff-quick", True, lambda laws: check_chernoff(laws, 60)),
    ("oracle-chernoff-full", False, lambda laws: check_chernoff(laws, 300)),
    ("montecarlo-quick", True, lambda laws: check_montecarlo(laws, 20_000)),
    ("montecarlo-full", False, lambda laws: check_montecarlo(laws, 1_000_000)),
    ("montecarlo-coverage", False, check_coverage),
    ("tauberian-sums", False, check_tauberian),
]


def run_suite(
    laws: list[StepLaw] | None = None,
    quick: bool = False,
    only: str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[CheckResult]:
    """Run the invariant suite; returns one result per executed check."""
    if laws is None:
        laws = default_laws()
    results = []
    for name, in_quick, fn in _CHECKS:
        if quick and not in_quick:
            continue
        if only and only not in name:
            continue
        start = time.perf_counter()
        try:
            ok, detail = fn(laws)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        result = CheckResult(name=name, passed=bool(ok), detail=detail, seconds=elapsed)
        results.append(result)
        if progress is not None:
            status = "PASS" if result.passed else "FAIL"
            progress(f"{status} {name} ({elapsed:.2f}s): {detail}")
    return results
