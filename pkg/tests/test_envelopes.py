import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkverify import (ComparabilityConstants, HalfSpace, InputError, ModelParams, dirichlet_envelope, green_f,
                      green_g, h_envelope, jump_intensity, levy_exponent, phi, q_form, stable_constant,
                      stable_form, survival_envelope)
from hkverify.envelopes import green_f_from_distances, green_g_from_distances

H = HalfSpace(0.0)


def pt(*c):
    return np.array(c, dtype=float)


@pytest.mark.parametrize("a,r,alpha,expected", [(1.0, 1.0, 0.7, 1.0), (1.0, 4.0, 1.0, 2.0), (4.0, 1.0, 1.0, 0.5),
                                                (0.0, 5.0, 1.0, 5.0)])
def test_phi(a, r, alpha, expected):
    assert phi(a, r, alpha) == pytest.approx(expected, rel=1e-15)


def test_phi_vectorised():
    r = np.array([0.0, 1.0, 4.0])
    np.testing.assert_allclose(phi(1.0, r, 1.0), [0.0, 1.0, 2.0])


@pytest.mark.parametrize("p,r,expected", [((1, 0.4, 1.0), 1.0, 2.0), ((1, 1.0, 0.0), 3.0, 9.0),
                                          ((1, 1.0, 2.0), 3.0, 15.0)])
def test_levy_exponent(p, r, expected):
    assert levy_exponent(ModelParams(*p), r) == pytest.approx(expected)


def _stable_constant_mp(d, alpha):
    d, alpha = mpmath.mpf(d), mpmath.mpf(alpha)
    return float(alpha * 2 ** (alpha - 1) * mpmath.gamma((d + alpha) / 2)
                 / (mpmath.pi ** (d / 2) * mpmath.gamma(1 - alpha / 2)))


def test_stable_constant_cauchy():
    assert stable_constant(1, 1.0) == pytest.approx(1 / math.pi, rel=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
@pytest.mark.parametrize("alpha", [0.05, 0.5, 1.0, 1.5, 1.9, 1.999])
def test_stable_constant_against_mpmath(d, alpha):
    assert stable_constant(d, alpha) == pytest.approx(_stable_constant_mp(d, alpha), rel=1e-13)


def test_stable_constant_near_two_is_finite():
    # 1/Γ(1 - α/2) sends the constant to zero, not infinity
    v = stable_constant(1, 1.999)
    assert math.isfinite(v) and 0 < v < 1e-2


def test_jump_intensity():
    assert jump_intensity(ModelParams(1, 1.0, 1.0), 1.0) == pytest.approx(1 / math.pi)
    p = ModelParams(3, 1.3, 2.0)
    assert jump_intensity(p, 0.7) / jump_intensity(p, 1.4) == pytest.approx(2 ** 4.3, rel=1e-13)
    assert jump_intensity(ModelParams(2, 1.0, 0.0), 2.0) == 0.0
    with pytest.raises(InputError):
        jump_intensity(p, 0.0)


def test_h_envelope_examples():
    p = ModelParams(1, 1.0, 1.0)
    assert h_envelope(p, 1.0, 1.0, 0.0) == pytest.approx(1.0)
    assert h_envelope(p, 1.0, 1.0, 2.0) == pytest.approx(math.exp(-4) + 0.25, rel=1e-14)
    assert h_envelope(p, 1.0, 4.0, 0.0) == pytest.approx(0.25)


def test_stable_form_examples():
    p = ModelParams(1, 1.0, 1.0)
    assert stable_form(p, 1.0, 1.0) == pytest.approx(1.0)
    assert stable_form(p, 1.0, 2.0) == pytest.approx(0.25)
    assert stable_form(p, 4.0, 1.0) == pytest.approx(0.25)


def test_q_form_examples():
    p = ModelParams(1, 1.0, 1.0)
    assert q_form(p, H, 1.0, pt(1), pt(2)) == pytest.approx(1.0)
    assert q_form(p, H, 100.0, pt(1), pt(2)) == pytest.approx(1.41421356e-4, rel=1e-8)
    # r = 0: boundary factors times (a^α t)^{-d/α}
    assert q_form(p, H, 100.0, pt(3), pt(3)) == pytest.approx((math.sqrt(3) / 10) ** 2 * 0.01)


def test_dirichlet_envelope_examples():
    k = ComparabilityConstants(1.0, 1.0)
    e = dirichlet_envelope(ModelParams(1, 1.0, 1.0), H, 4.0, pt(1), pt(1), k)
    assert e.lower == pytest.approx(0.0625) and e.upper == pytest.approx(0.0625)
    e = dirichlet_envelope(ModelParams(1, 1.0, 0.0), H, 1.0, pt(1), pt(1), k)
    assert e.lower == pytest.approx(1.0) and e.upper == pytest.approx(1.0)


def test_dirichlet_envelope_contains_both_branches_at_threshold():
    p = ModelParams(1, 1.0, 1.0)
    k = ComparabilityConstants(2.0, 1.5)
    x, y = pt(0.5), pt(1.7)
    at = dirichlet_envelope(p, H, 1.0, x, y, k)
    below = dirichlet_envelope(p, H, 1.0 - 1e-12, x, y, k)
    above = dirichlet_envelope(p, H, 1.0 + 1e-12, x, y, k)
    assert at.lower <= min(below.lower, above.lower) * (1 + 1e-9)
    assert at.upper >= max(below.upper, above.upper) * (1 - 1e-9)


def test_survival_envelope_examples():
    p = ModelParams(1, 1.0, 1.0)
    e = survival_envelope(p, H, 1.0, pt(1))
    assert (e.lower, e.upper) == pytest.approx((1.0, 1.0))
    e = survival_envelope(p, H, 100.0, pt(1), ComparabilityConstants(2.0, 1.0))
    assert (e.lower, e.upper) == pytest.approx((0.05, 0.2))
    e = survival_envelope(p, H, 100.0, pt(1e9), ComparabilityConstants(2.0, 1.0))
    assert (e.lower, e.upper) == pytest.approx((0.5, 2.0))


def test_comparability_constants_validation():
    with pytest.raises(InputError):
        ComparabilityConstants(0.5, 1.0)


def test_green_f_examples():
    assert green_f_from_distances(ModelParams(1, 1.0, 1.0), 1.0, 1.0, 1.0) == pytest.approx(math.log(2))
    assert green_f_from_distances(ModelParams(3, 1.0, 1.0), 50.0, 50.0, 1.0) == pytest.approx(1.0)
    assert green_f_from_distances(ModelParams(1, 1.5, 1.0), 1.0, 1.0, 2.0) == pytest.approx(0.5)


def test_green_g_examples():
    assert green_g_from_distances(ModelParams(3, 1.0, 1.0), 1.0, 1.0, 1.0) == pytest.approx(1.0)
    assert green_g_from_distances(ModelParams(2, 1.0, 1.0), 1.0, 1.0, 1.0) == pytest.approx(math.log(2))
    assert green_g_from_distances(ModelParams(1, 0.5, 1.0), 4.0, 4.0, 1.0) == pytest.approx(1.0)


def test_green_domain_wrappers_agree():
    p = ModelParams(2, 1.2, 0.8)
    x, y = pt(0.3, 1.5), pt(-0.4, 2.5)
    r = float(np.linalg.norm(x - y))
    assert green_f(p, H, x, y) == green_f_from_distances(p, 1.5, 2.5, r)
    assert green_g(p, H, x, y) == green_g_from_distances(p, 1.5, 2.5, r)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.05, 20.0), alpha=st.floats(0.05, 1.95), r=st.floats(0.0, 1e4))
def test_phi_monotone_and_capped(a, alpha, r):
    v = phi(a, r, alpha)
    assert 0.0 <= v <= r * (1 + 1e-15)
    assert phi(a, r * 1.5, alpha) >= v


@settings(max_examples=200, deadline=None)
@given(d=st.integers(1, 3), alpha=st.floats(0.1, 1.9), a=st.floats(0.1, 10.0),
       t=st.floats(1e-3, 1e3), r=st.floats(0.0, 1e2))
def test_envelope_lower_below_upper(d, alpha, a, t, r):
    p = ModelParams(d, alpha, a)
    x = np.zeros(d)
    x[-1] = 1.0
    y = x.copy()
    y[0] += r
    e = dirichlet_envelope(p, H, t, x, y, ComparabilityConstants(3.0, 2.0))
    assert 0.0 <= e.lower <= e.upper
    assert math.isfinite(e.upper)
