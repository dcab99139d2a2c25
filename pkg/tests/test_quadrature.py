import math

import numpy as np
import pytest

from hkverify import HalfSpace, InputError, ModelParams, SingularInputError
from hkverify.envelopes import green_g_from_distances
from hkverify.quadrature import (I_integral_from_distances, J_bound_shape, J_integral_from_distances,
                                 check_prop21, closed_I, green_halfline_envelope, integrate_I,
                                 integrate_q_over_time, prop21_shape, q_time_integral_from_distances,
                                 v_envelope)

H = HalfSpace(0.0)


def pt(*c):
    return np.array(c, dtype=float)


def test_q_integral_reference_point():
    res = integrate_q_over_time(ModelParams(1, 1.0, 1.0), H, pt(1.0), pt(2.0))
    assert math.isfinite(res.value) and res.value > 0
    assert res.abs_error_estimate <= 1e-8 * res.value


def test_q_integral_against_plain_quadrature():
    from scipy import integrate
    from hkverify.envelopes import q_from_distances
    p = ModelParams(2, 1.2, 0.7)
    f = lambda t: float(q_from_distances(p, t, 0.8, 1.9, 1.4))
    ref = sum(integrate.quad(f, lo, hi, limit=400, epsrel=1e-11)[0]
              for lo, hi in ((0, 1e-2), (1e-2, 1), (1, 1e2), (1e2, 1e4), (1e4, np.inf)))
    assert q_time_integral_from_distances(p, 0.8, 1.9, 1.4).value == pytest.approx(ref, rel=1e-6)


def test_q_integral_monotone_in_separation():
    p = ModelParams(2, 1.0, 1.0)
    far = q_time_integral_from_distances(p, 5.0, 5.0, 1.0).value
    near = q_time_integral_from_distances(p, 5.0, 5.0, 0.5).value
    assert near > far


def test_q_integral_boundary_point_is_zero():
    assert integrate_q_over_time(ModelParams(1, 1.0, 1.0), H, pt(0.0), pt(2.0)).value == 0.0


def test_q_integral_needs_distinct_points_in_low_dimension():
    with pytest.raises(SingularInputError):
        q_time_integral_from_distances(ModelParams(1, 1.0, 1.0), 1.0, 1.0, 0.0)


def test_I_examples():
    assert closed_I(ModelParams(3, 1.0, 1.0), 1.0, 1.0, 0.5) == pytest.approx(2.0)
    assert closed_I(ModelParams(2, 1.0, 1.0), 1.0, 1.0, 0.5) == pytest.approx(math.log(5))
    for d in (2, 3):
        p = ModelParams(d, 1.0, 1.0)
        ratio = I_integral_from_distances(p, 1.0, 1.0, 1.0, 0.5).value / closed_I(p, 1.0, 1.0, 0.5)
        assert 1 / 20 <= ratio <= 20
    assert I_integral_from_distances(ModelParams(3, 1.0, 1.0), 1.0, 0.0, 1.0, 0.5).value == 0.0


def test_I_outside_validity_range():
    with pytest.raises(InputError):
        integrate_I(ModelParams(3, 1.0, 1.0), H, 1.0, pt(0, 0, 1.0), pt(0, 0, 3.5))


def test_J_examples():
    p = ModelParams(2, 1.0, 1.0)
    assert J_bound_shape(1.0, 1.0, 0.5) == pytest.approx(1.0)
    assert J_integral_from_distances(p, 1.0, 1.0, 0.5).value <= 20 * J_bound_shape(1.0, 1.0, 0.5)
    p = ModelParams(1, 1.5, 1.0)
    total = I_integral_from_distances(p, 1.0, 1.0, 1.0, 0.5).value + J_integral_from_distances(p, 1.0, 1.0, 0.5).value
    g = green_g_from_distances(p, 1.0, 1.0, 0.5)
    assert g == pytest.approx(1.0)
    assert 1 / 20 <= total / g <= 20


def test_J_near_validity_boundary():
    p = ModelParams(2, 1.5, 4.0)
    r_star = 4.0 ** (-1.5 / 0.5)
    v = J_integral_from_distances(p, 1.0, 1.0, r_star * (1 - 1e-9)).value
    assert math.isfinite(v) and v >= 0


@pytest.mark.parametrize("alpha,r,expected", [(1.0, 4.0, 0.5), (1.0, 0.25, 1.0), (0.3, 1.0, 1.0), (1.7, 1.0, 1.0)])
def test_v_envelope(alpha, r, expected):
    assert v_envelope(alpha, r) == pytest.approx(expected)


def test_v_envelope_bounded():
    r = np.geomspace(1e-12, 1e12, 200)
    v = v_envelope(0.8, r)
    assert np.all((v > 0) & (v <= 1.0))


def test_green_halfline_examples():
    assert green_halfline_envelope(1.0, 1.0, 1.0).value == pytest.approx(1.0, rel=1e-12)
    assert green_halfline_envelope(1.0, 4.0, 4.0).value == pytest.approx(1 + math.log(4), rel=1e-12)
    assert green_halfline_envelope(1.0, 1.0, 2.0).value == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-12)


def test_occupation_examples():
    assert check_prop21(1.0, 1.0, 0.5)[1] == pytest.approx(0.5)
    lhs, rhs = check_prop21(1.0, 100.0, 1.0)
    assert rhs == pytest.approx(10.0) and 0 < lhs / rhs < math.inf
    assert prop21_shape(1.0, 100.0, 1.0) == pytest.approx(10.0)


def test_occupation_boundary_limit():
    ratios = []
    for x in (1e-2, 1e-4, 1e-6):
        lhs, rhs = check_prop21(1.0, 1.0, x)
        assert lhs < 2 * x
        ratios.append(lhs / rhs)
    assert max(ratios) / min(ratios) < 1.1


def test_occupation_rejects_outside():
    with pytest.raises(InputError):
        check_prop21(1.0, 1.0, 1.5)
