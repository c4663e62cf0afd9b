import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from recdev import walk_model as wm
from recdev.errors import (
    BadStableParamsError,
    DegenerateP0Error,
    DomainError,
    LawValidationError,
    NotCriticalError,
    NotNormalizedError,
    SingularDerivativeError,
    UnknownNameError,
    ZeroQError,
)
from recdev.power_series import ScaledSeries


class TestValidation:
    def test_ssrw_valid(self):
        law = wm.validate_law({"side": "right", "kind": "finite", "q": 0.5, "p": [0.0, 0.5]})
        assert law.q == 0.5
        assert wm.pgf_eval(law, 1.0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_drifted_law_rejected(self):
        # phi'(1) = p_0 + 2 p_1 = 0.75 by direct summation: drift != 0
        with pytest.raises(NotCriticalError):
            wm.validate_law({"side": "left", "kind": "finite", "q": 0.5, "p": [0.25, 0.25, 0.0]})

    def test_stable_derived_q(self):
        law = wm.validate_law({"side": "right", "kind": "stable", "gamma": 0.6, "beta": 0.5})
        assert law.q == pytest.approx(0.4, abs=1e-15)

    def test_not_normalized(self):
        with pytest.raises(NotNormalizedError):
            wm.validate_law({"side": "right", "kind": "finite", "q": 0.5, "p": [0.0, 0.6]})

    def test_negative_probability(self):
        with pytest.raises(NotNormalizedError):
            wm.validate_law({"side": "right", "kind": "finite", "q": 0.7, "p": [0.5, -0.2, 0.0]})

    def test_zero_q(self):
        with pytest.raises(ZeroQError):
            wm.validate_law({"side": "right", "kind": "finite", "q": 0.0, "p": [1.0]})

    def test_degenerate_p0(self):
        with pytest.raises(DegenerateP0Error):
            wm.validate_law({"side": "right", "kind": "finite", "q": 0.5, "p": [1.0]})

    def test_bad_stable_params(self):
        with pytest.raises(BadStableParamsError):
            wm.validate_law({"side": "right", "kind": "stable", "gamma": 1.2, "beta": 0.5})
        with pytest.raises(BadStableParamsError):
            wm.validate_law({"side": "right", "kind": "stable", "gamma": 0.6, "beta": 0.5, "q": 0.3})

    def test_unknown_fields_rejected(self):
        with pytest.raises(LawValidationError):
            wm.validate_law({"side": "right", "kind": "finite", "q": 0.5, "p": [0.0, 0.5], "x": 1})

    def test_unknown_builtin(self):
        with pytest.raises(UnknownNameError):
            wm.builtin_law("srw_right")

    def test_support_cap(self):
        with pytest.raises(LawValidationError):
            wm.validate_law(
                {"side": "right", "kind": "finite", "q": 0.5, "p": [0.0] * (10**6 + 2)}
            )


class TestBuiltins:
    def test_ssrw(self):
        law = wm.builtin_law("ssrw_right")
        assert law.p == (0.0, 0.5)

    def test_skewed_left_drift(self):
        law = wm.builtin_law("skewed_left")
        # phi'(1) = p_0 + 3 p_2 = 1/4 + 3/4
        assert wm.pgf_eval(law, 1.0, 1) == pytest.approx(1.0, abs=1e-14)
        assert wm.mean_step(law) == pytest.approx(0.0, abs=1e-14)

    def test_stable_name(self):
        law = wm.builtin_law("stable:0.6:0.5:right")
        assert law.q == pytest.approx(0.4, abs=1e-15)
        assert law.side is wm.Side.RIGHT


class TestPgfEval:
    def test_ssrw_point(self, ssrw_right):
        assert wm.pgf_eval(ssrw_right, 0.5, 0) == 0.625

    def test_ssrw_derivative_at_one(self, ssrw_right):
        assert wm.pgf_eval(ssrw_right, 1.0, 1) == 1.0

    def test_stable_at_zero(self, stable_right):
        assert wm.pgf_eval(stable_right, 0.0, 0) == pytest.approx(0.4, abs=1e-15)

    def test_domain(self, ssrw_right):
        with pytest.raises(DomainError):
            wm.pgf_eval(ssrw_right, 1.0 + 1e-9, 0)
        with pytest.raises(DomainError):
            wm.pgf_eval(ssrw_right, -0.1, 0)

    def test_stable_second_derivative_singular(self, stable_right):
        with pytest.raises(SingularDerivativeError):
            wm.pgf_eval(stable_right, 1.0, 2)
        assert wm.pgf_eval(stable_right, 0.99, 2) > 0


class TestPgfCoefficients:
    def test_stable_expansion(self, stable_right):
        got = wm.pgf_coefficients(stable_right, 3)
        assert np.allclose(got, [0.4, 0.4, 0.15, 0.025], atol=1e-15)

    def test_finite_copy(self, ssrw_right):
        assert np.allclose(wm.pgf_coefficients(ssrw_right, 2), [0.5, 0.0, 0.5])

    def test_nonnegative(self, stable_right):
        assert wm.pgf_coefficients(stable_right, 5000).min() >= 0.0

    def test_sum_to_one_finite(self, skewed_right):
        total = math.fsum(wm.pgf_coefficients(skewed_right, 10))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_sum_to_one_stable(self, stable_right):
        # tail decays like n^(-2-beta); 3e6 terms push the defect below 1e-10
        total = math.fsum(wm.pgf_coefficients(stable_right, 3 * 10**6))
        assert total == pytest.approx(1.0, abs=1e-10)


class TestStableEvalConsistency:
    def test_series_matches_closed_form(self, builtin_laws):
        for law in builtin_laws:
            series = ScaledSeries.make(wm.pgf_coefficients(law, 2000))
            for s in np.arange(0.0, 0.995, 0.05):
                assert series.horner(s) == pytest.approx(
                    wm.pgf_eval(law, s, 0), abs=1e-9
                ), law.describe()

    def test_shape(self, builtin_laws):
        for law in builtin_laws:
            for s in np.arange(0.0, 1.0, 0.01):
                assert wm.pgf_eval(law, s, 1) >= 0.0
                assert wm.pgf_eval(law, s, 2) >= 0.0
            assert wm.pgf_eval(law, 1.0, 0) == pytest.approx(1.0, abs=1e-12)
            assert wm.pgf_eval(law, 0.0, 0) > 0.0

    def test_one_minus_and_minus_const(self, builtin_laws):
        for law in builtin_laws:
            for s in (0.0, 0.3, 0.9, 0.999999, 1.0):
                assert wm.pgf_one_minus(law, 1.0 - s) == pytest.approx(
                    1.0 - wm.pgf_eval(law, s, 0), abs=1e-12
                )
                assert wm.pgf_minus_const(law, s) == pytest.approx(
                    wm.pgf_eval(law, s, 0) - law.q, abs=1e-12
                )


class TestJsonRoundTrip:
    @pytest.mark.parametrize(
        "name", ["ssrw_right", "skewed_left", "stable:0.6:0.5:right"]
    )
    def test_round_trip(self, name):
        law = wm.builtin_law(name)
        doc = json.loads(json.dumps(wm.law_to_json(law)))
        assert wm.validate_law(doc) == law


@st.composite
def critical_finite_laws(draw):
    k = draw(st.integers(min_value=1, max_value=5))
    weights = draw(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=k + 1,
            max_size=k + 1,
        )
    )
    assume(math.fsum(weights[1:]) > 1e-3)
    denom = math.fsum((i + 1) * w for i, w in enumerate(weights))
    assume(denom > 1e-6)
    p = [w / denom for w in weights]
    q = 1.0 - math.fsum(p)
    assume(q > 1e-9)
    side = draw(st.sampled_from(["right", "left"]))
    return wm.validate_law({"side": side, "kind": "finite", "q": q, "p": p})


@settings(max_examples=80, deadline=None)
@given(critical_finite_laws())
def test_random_laws_have_zero_drift(law):
    assert abs(wm.mean_step(law)) <= 1e-9
    assert abs(wm.pgf_eval(law, 1.0, 1) - 1.0) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(critical_finite_laws())
def test_drift_equivalence_both_ways(law):
    # the equivalence also holds for perturbed, non-critical descriptions
    crit = abs(wm.pgf_eval(law, 1.0, 1) - 1.0) <= 1e-9
    drift = abs(wm.mean_step(law)) <= 1e-9
    assert crit == drift
