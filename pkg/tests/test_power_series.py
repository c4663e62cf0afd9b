import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recdev import power_series as ps
from recdev.errors import BadConstantTermError


def make(coeffs, e=0):
    return ps.ScaledSeries.make(coeffs, e)


class TestScaledFloat:
    def test_round_trip(self):
        v = ps.ScaledFloat.from_float(0.375)
        assert v.to_float() == 0.375
        assert 0.5 <= abs(v.mantissa) < 1.0

    def test_from_ln(self):
        v = ps.ScaledFloat.from_ln(-3000.0)
        assert v.ln() == pytest.approx(-3000.0, abs=1e-9)
        assert v.to_float() == 0.0  # beyond float range

    def test_decimal_underflow(self):
        v = ps.ScaledFloat.from_ln(-3000.0 * math.log(10.0))
        assert v.decimal().endswith("e-3000")

    def test_zero(self):
        assert ps.ScaledFloat.from_float(0.0).ln() == -math.inf
        assert ps.ScaledFloat.from_float(0.0).decimal() == "0"


class TestNormalization:
    def test_peak_in_range(self):
        s = make([3.0, 0.25, -8.0])
        assert 0.5 <= np.max(np.abs(s.coeffs)) < 2.0
        assert np.allclose(s.values(), [3.0, 0.25, -8.0])

    def test_double_normalize_is_noop(self):
        s = make([1e-30, 7e-29])
        again = ps.ScaledSeries.make(s.coeffs, s.exponent2)
        assert again.exponent2 == s.exponent2
        assert np.array_equal(again.coeffs, s.coeffs)

    def test_zero_series(self):
        z = ps.ScaledSeries.zero(5)
        assert z.exponent2 == 0
        assert z.is_zero()


class TestConvMultiply:
    def test_one_plus_s_squared(self):
        a = make([1.0, 1.0])
        out = ps.conv_multiply(a, a, 2)
        assert np.allclose(out.values(), [1.0, 2.0, 1.0])

    def test_zero_absorbs(self):
        a = make([0.3, 0.7])
        z = ps.ScaledSeries.zero(3)
        assert ps.conv_multiply(a, z, 3).is_zero()

    def test_truncation(self):
        a = make([1.0, 1.0, 1.0])
        out = ps.conv_multiply(a, a, 1)
        assert np.allclose(out.values(), [1.0, 2.0])

    def test_exponents_add(self):
        a = make([1.0], -600)
        b = make([1.0], -600)
        out = ps.conv_multiply(a, b, 0)
        assert out.coefficient(0).ln() == pytest.approx(-1200 * math.log(2.0))

    def test_ssrw_inter_record_convolution(self):
        # Y pmf of the symmetric walk starts [0, 1/2, 1/4, 0, ...]; the sum of
        # two copies puts mass 1/4 at 2 and 1/4 at 3 (enumerated by hand)
        y = make([0.0, 0.5, 0.25, 0.0])
        out = ps.conv_multiply(y, y, 3).values()
        assert out[2] == 0.25
        assert out[3] == 0.25


class TestReciprocal:
    def test_geometric(self):
        out = ps.reciprocal_one_minus(make([0.0, 1.0]), 5)
        assert np.allclose(out.values(), np.ones(6))

    def test_requires_zero_constant(self):
        with pytest.raises(BadConstantTermError):
            ps.reciprocal_one_minus(make([0.5, 1.0]), 3)

    def test_ssrw_return_probabilities(self):
        # 1/(1 - f0) for the symmetric walk: two-step return probability 1/2
        f0 = make([0.0, 0.5, 0.25, 0.0, 0.0625, 0.0])
        out = ps.reciprocal_one_minus(f0, 5).values()
        assert out[0] == 1.0
        assert out[1] == 0.5
        assert out[2] == 0.5

    def test_definitional_identity(self):
        rng = np.random.default_rng(3)
        arr = rng.random(40)
        arr[0] = 0.0
        arr /= arr.sum() * 1.1  # sub-probability mass keeps 1/(1-g) bounded
        g = make(arr)
        rec = ps.reciprocal_one_minus(g, 39)
        one_minus_g = ps.series_subtract(make(np.r_[1.0, np.zeros(39)]), g, 39)
        prod = ps.conv_multiply(one_minus_g, rec, 39).values()
        prod[0] -= 1.0
        assert np.max(np.abs(prod)) <= 1e-13


class TestPolyApply:
    def test_identity_polynomial(self):
        inner = make([0.0, 0.25, 0.5])
        out = ps.poly_apply([0.0, 1.0], inner, 2)
        assert np.allclose(out.values(), inner.values())

    def test_constant(self):
        out = ps.poly_apply([1.0], make([0.0, 0.9]), 3)
        assert np.allclose(out.values(), [1.0, 0.0, 0.0, 0.0])

    def test_requires_zero_inner_constant(self):
        with pytest.raises(BadConstantTermError):
            ps.poly_apply([0.0, 1.0], make([0.1, 0.2]), 2)

    def test_square(self):
        out = ps.poly_apply([0.0, 0.0, 1.0], make([0.0, 1.0, 1.0]), 4)
        assert np.allclose(out.values(), [0.0, 0.0, 1.0, 2.0, 1.0])


class TestBinomialPower:
    def test_integer_power(self):
        out = ps.binomial_power(make([0.0, 1.0]), 2.0, 4)
        assert np.allclose(out.values(), [1.0, -2.0, 1.0, 0.0, 0.0])

    def test_sqrt_against_binomial_series(self):
        mu = 0.5
        out = ps.binomial_power(make([0.0, 1.0]), mu, 6).values()
        expect = [1.0]
        b = 1.0
        for j in range(6):
            b *= (mu - j) / (j + 1)
            expect.append((-1) ** (j + 1) * b)
        assert np.allclose(out, expect, atol=1e-15)


@st.composite
def nonneg_series(draw, max_degree=64):
    deg = draw(st.integers(min_value=0, max_value=max_degree))
    vals = draw(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=deg + 1,
            max_size=deg + 1,
        )
    )
    return make(vals)


@settings(max_examples=60, deadline=None)
@given(nonneg_series(), nonneg_series())
def test_convolution_commutes(a, b):
    n = max(a.degree, b.degree)
    ab = ps.conv_multiply(a, b, n)
    ba = ps.conv_multiply(b, a, n)
    scale = max(np.max(np.abs(ab.values())), 1e-300)
    assert np.max(np.abs(ab.values() - ba.values())) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(nonneg_series(16), nonneg_series(16), nonneg_series(16))
def test_convolution_associates(a, b, c):
    n = 16
    left = ps.conv_multiply(ps.conv_multiply(a, b, n), c, n)
    right = ps.conv_multiply(a, ps.conv_multiply(b, c, n), n)
    scale = max(np.max(np.abs(left.values())), 1e-300)
    assert np.max(np.abs(left.values() - right.values())) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(nonneg_series(), nonneg_series())
def test_mass_conservation(a, b):
    n = a.degree + b.degree
    prod = ps.conv_multiply(a, b, n)
    total = math.fsum(prod.values())
    bound = math.fsum(a.values()) * math.fsum(b.values())
    assert total <= bound + 1e-12 * max(1.0, bound)
