import math

import numpy as np
import pytest

from hkverify import Ball, Box, HalfSpace, InputError, Interval, ModelParams, SinusoidalHalfSpaceLike
from hkverify import contains, delta, regime_thresholds, scaled_domain


def test_params_validation():
    with pytest.raises(InputError):
        ModelParams(0, 1.0, 1.0)
    with pytest.raises(InputError):
        ModelParams(1, 2.0, 1.0)
    with pytest.raises(InputError):
        ModelParams(1, 0.0, 1.0)
    with pytest.raises(InputError):
        ModelParams(1, 1.0, -0.1)
    with pytest.raises(InputError):
        ModelParams(1, 1.0, 2.0, M=1.0)
    p = ModelParams(2, 1.5, 0.0)
    assert p.a == 0.0 and p.with_a(3.0).a == 3.0


@pytest.mark.parametrize("b,xd,inside", [(0.0, 1.0, True), (0.0, 0.0, False), (2.0, 1.0, False)])
def test_halfspace_contains(b, xd, inside):
    assert contains(HalfSpace(b), np.array([0.3, xd])) is inside


@pytest.mark.parametrize("b,xd,dist", [(0.0, 3.0, 3.0), (1.0, 0.5, 0.0)])
def test_halfspace_delta(b, xd, dist):
    assert delta(HalfSpace(b), np.array([xd])) == dist


def test_sinusoid_delta_against_dense_boundary():
    dom = SinusoidalHalfSpaceLike(b1=0.0, amplitude=1.0, wavelength=2 * math.pi)
    assert dom.b2 == 1.0
    s = np.linspace(-20.0, 20.0, 400_001)
    curve = np.stack([s, 0.5 * (1 + np.sin(s))], axis=1)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = np.array([rng.uniform(-5, 5), rng.uniform(1.2, 6.0)])
        dense = np.min(np.linalg.norm(curve - x, axis=1))
        got = dom.delta(x)
        assert abs(got - dense) < 1e-6
        assert x[1] - 1.0 <= got <= x[1]


def test_sinusoid_deep_point():
    dom = SinusoidalHalfSpaceLike(0.0, 1.0)
    x = np.array([0.7, 1e4])
    assert x[1] - 1.0 <= dom.delta(x) <= x[1]


def test_box_and_ball():
    box = Interval(0.0, 2.0)
    assert contains(box, np.array([1.0])) and not contains(box, np.array([2.0]))
    assert delta(box, np.array([0.5])) == 0.5
    ball = Ball((0.0, 0.0), 2.0)
    assert delta(ball, np.array([1.0, 0.0])) == pytest.approx(1.0)
    with pytest.raises(InputError):
        Box((1.0,), (0.0,))
    assert scaled_domain(ball, 3.0).radius == 6.0
    assert scaled_domain(HalfSpace(1.0), 2.0).b == 2.0


@pytest.mark.parametrize("a,alpha,expected", [
    (1.0, 0.3, (1.0, 1.0)), (1.0, 1.7, (1.0, 1.0)),
    (2.0, 1.0, (0.25, 0.5)), (0.5, 1.0, (4.0, 2.0)),
])
def test_regime_thresholds(a, alpha, expected):
    t_star, r_star = regime_thresholds(ModelParams(1, alpha, a))
    assert t_star == pytest.approx(expected[0], rel=1e-15)
    assert r_star == pytest.approx(expected[1], rel=1e-15)


def test_regime_thresholds_identity():
    for a in (0.1, 0.7, 3.0, 10.0):
        for alpha in (0.2, 1.0, 1.8):
            t_star, r_star = regime_thresholds(ModelParams(2, alpha, a))
            assert t_star == r_star ** 2
            assert t_star == pytest.approx(a ** (2 * alpha / (alpha - 2)), rel=1e-12)


def test_regime_thresholds_needs_positive_a():
    with pytest.raises(InputError):
        regime_thresholds(ModelParams(1, 1.0, 0.0))
