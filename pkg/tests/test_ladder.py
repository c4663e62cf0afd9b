import math

import numpy as np
import pytest
from scipy.optimize import brentq

from recdev import ladder, oracle, power_series as ps, walk_model as wm
from recdev.errors import DomainError

# frozen expected values, each computed from the independent oracle next to it


def ssrw_h_closed(s):
    return (1.0 - math.sqrt(1.0 - s * s)) / s


def ssrw_f0_closed(s):
    return (1.0 + s - math.sqrt(1.0 - s * s)) / 2.0


class TestHPoint:
    def test_ssrw_exact_half(self, ssrw_right):
        assert ladder.h_point(ssrw_right, 0.8) == pytest.approx(0.5, abs=1e-13)
        assert ssrw_h_closed(0.8) == 0.5

    def test_ssrw_at_half(self, ssrw_right):
        expect = 2.0 - math.sqrt(3.0)  # closed form at s = 1/2
        assert ladder.h_point(ssrw_right, 0.5) == pytest.approx(expect, abs=1e-13)

    def test_skewed(self, skewed_right):
        # root of 0.875 h - 0.125 h^3 = 0.25 (the fixed point at s = 1/2)
        expect = brentq(lambda x: 0.875 * x - 0.125 * x**3 - 0.25, 0.0, 1.0, xtol=1e-15)
        assert expect == pytest.approx(0.2891685464483101, abs=1e-12)
        assert ladder.h_point(skewed_right, 0.5) == pytest.approx(expect, abs=1e-12)

    def test_stable(self, stable_right):
        # root of 0.1 (1 - v) = 0.36 v^1.5 with v = 1 - h, at s = 0.9
        v = brentq(lambda t: 0.1 * (1 - t) - 0.36 * t**1.5, 1e-12, 1 - 1e-12, xtol=1e-15)
        assert 1.0 - v == pytest.approx(0.6730413503884432, abs=1e-12)
        assert ladder.h_point(stable_right, 0.9) == pytest.approx(1.0 - v, abs=1e-12)

    def test_h_at_zero(self, ssrw_right):
        assert ladder.h_point(ssrw_right, 0.0) == 0.0

    def test_domain(self, ssrw_right):
        with pytest.raises(DomainError):
            ladder.h_point(ssrw_right, 1.0)
        with pytest.raises(DomainError):
            ladder.h_point(ssrw_right, -0.1)

    def test_residual_on_grid(self, builtin_laws):
        for law in builtin_laws:
            prev = -1.0
            for s in np.linspace(0.01, 0.99, 99):
                h = ladder.h_point(law, s)
                assert abs(h - s * wm.pgf_eval(law, h, 0)) <= 1e-13
                assert h > prev  # strictly increasing
                prev = h

    def test_near_domain_edge(self, builtin_laws):
        for law in builtin_laws:
            s = ladder.H_POINT_MAX_S
            h = ladder.h_point(law, s)
            assert 0.0 < h < 1.0
            assert abs(h - s * wm.pgf_eval(law, h, 0)) <= 1e-13


class TestHSeries:
    def test_ssrw_coefficients(self, ssrw_right):
        # expansion of (1 - sqrt(1 - s^2))/s
        got = ladder.h_series(ssrw_right, 5).values()
        assert np.array_equal(got, [0.0, 0.5, 0.0, 0.125, 0.0, 0.0625])

    def test_leading_coefficients(self, builtin_laws):
        for law in builtin_laws:
            vals = ladder.h_series(law, 3).values()
            assert vals[0] == 0.0
            assert vals[1] == pytest.approx(law.q, abs=1e-14)
            assert vals[2] == pytest.approx(wm.p_zero(law) * law.q, abs=1e-14)

    def test_fixed_point_identity(self, builtin_laws):
        for law in builtin_laws:
            n = 200
            h = ladder.h_series(law, n)
            sphi = ps.series_shift(ladder._phi_of_series(law, h, n), 1, n)
            res = ps.series_subtract(h, sphi, n)
            worst = 0.0 if res.is_zero() else float(np.max(np.abs(res.values())))
            assert worst <= 1e-13, law.describe()

    def test_series_matches_pointwise(self, builtin_laws):
        for law in builtin_laws:
            h = ladder.h_series(law, 500)
            for s in np.arange(0.1, 0.905, 0.1):
                assert h.horner(s) == pytest.approx(
                    ladder.h_point(law, s), abs=1e-10
                ), law.describe()


class TestF0:
    def test_point_right(self, ssrw_right):
        assert ladder.f0_point(ssrw_right, 0.8) == pytest.approx(0.6, abs=1e-13)
        assert ssrw_f0_closed(0.8) == pytest.approx(0.6, abs=1e-15)

    def test_point_left_agrees(self, ssrw_left):
        # (s - h)/(1 - h) with h = 0.5: the symmetric walk is both-sided
        assert ladder.f0_point(ssrw_left, 0.8) == pytest.approx(0.6, abs=1e-12)

    def test_point_in_unit_interval(self, builtin_laws):
        for law in builtin_laws:
            for s in (0.1, 0.5, 0.9, 0.999):
                v = ladder.f0_point(law, s)
                assert 0.0 < v < 1.0

    def test_series_ssrw(self, ssrw_right):
        got = ladder.f0_series(ssrw_right, 4).values()
        assert np.array_equal(got, [0.0, 0.5, 0.25, 0.0, 0.0625])

    def test_series_sides_agree_for_ssrw(self, ssrw_right, ssrw_left):
        r = ladder.f0_series(ssrw_right, 120).values()
        l = ladder.f0_series(ssrw_left, 120).values()
        assert np.max(np.abs(r - l)) <= 1e-13

    def test_left_identity(self, builtin_laws):
        # (1 - f0)(1 - h) = (1 - s) as series, left-continuous laws
        deg = 200
        for law in builtin_laws:
            if law.side is not wm.Side.LEFT:
                continue
            one = ps.ScaledSeries.make(np.r_[1.0, np.zeros(deg)])
            prod = ps.conv_multiply(
                ps.series_subtract(one, ladder.f0_series(law, deg), deg),
                ps.series_subtract(one, ladder.h_series(law, deg), deg),
                deg,
            ).values()
            prod[0] -= 1.0
            prod[1] += 1.0
            assert np.max(np.abs(prod)) <= 1e-12, law.describe()

    def test_mass_monotone_and_bounded(self, builtin_laws):
        for law in builtin_laws:
            vals = ladder.f0_series(law, 300).values()
            sums = np.cumsum(vals)
            assert np.all(np.diff(sums) >= -1e-16)
            assert sums[-1] <= 1.0 + 1e-12
            # Y is proper but heavy-tailed: strictly below 1 at any finite degree
            assert sums[-1] < 1.0

    def test_series_matches_point(self, builtin_laws):
        for law in builtin_laws:
            f0 = ladder.f0_series(law, 400)
            for s in (0.2, 0.5, 0.8):
                assert f0.horner(s) == pytest.approx(
                    ladder.f0_point(law, s), abs=1e-9
                )

    def test_domain(self, ssrw_right):
        with pytest.raises(DomainError):
            ladder.f0_point(ssrw_right, 0.0)
        with pytest.raises(DomainError):
            ladder.f0_point(ssrw_right, 1.0)


class TestReturnSeries:
    def test_first_values(self, ssrw_right):
        vals = ladder.return_prob_series(ssrw_right, 4).values()
        assert vals[0] == 1.0
        assert vals[1] == 0.5  # one-step stay probability p_0 + q
        assert vals[2] == 0.5

    def test_values_are_probabilities(self, builtin_laws):
        for law in builtin_laws:
            vals = ladder.return_prob_series(law, 200).values()
            assert vals.min() >= 0.0
            assert vals.max() <= 1.0 + 1e-12

    def test_sqrt_n_growth(self, ssrw_right):
        # Tauberian constant (1-a) c / (q Gamma(2-a)) = 2 sqrt(2/pi) at a=1/2
        n = 10**4
        total = math.fsum(ladder.return_prob_series(ssrw_right, n).values())
        expect = 2.0 * math.sqrt(2.0) / math.sqrt(math.pi)
        assert total / math.sqrt(n) == pytest.approx(expect, rel=0.02)


def test_ladder_gf_bundle(ssrw_right):
    gf = ladder.build_ladder_gf(ssrw_right, 50)
    assert gf.h.degree == 50
    assert gf.f0.degree == 50
    assert gf.returns.degree == 50
    assert gf.law is ssrw_right
