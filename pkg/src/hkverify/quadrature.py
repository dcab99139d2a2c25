"""Numerical time integrals of the Dirichlet envelopes and half-line Green bounds.

The heat-kernel integrands are piecewise power laws with a handful of
known kinks.  Each integral is cut at those kinks, integrated in log
variables with adaptive Gauss-Kronrod, and completed by exact power-law
tails beyond the outermost kink.
"""

from __future__ import annotations

import math

import numpy as np

from .envelopes import (boundary_factor, green_f_from_distances, green_g_from_distances, phi,
                        q_from_distances, stable_form)
from .errors import ConvergenceError, InputError, SingularInputError
from .gk import ZERO, QuadratureResult, gauss_kronrod, integrate_log
from .model import Domain, ModelParams, regime_thresholds

RTOL = 1e-8
_PIECE_RTOL = 1e-10


def _points(domain: Domain, x, y):
    # points on or outside the boundary get δ = 0, and the killed integrands vanish there
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("x and y must be points of the same dimension")
    return domain.delta(x), domain.delta(y), float(np.linalg.norm(x - y))


def _check(res: QuadratureResult, what: str) -> QuadratureResult:
    if res.abs_error_estimate > RTOL * abs(res.value) and res.abs_error_estimate > 1e-300:
        raise ConvergenceError(f"{what}: error estimate {res.abs_error_estimate:.3g} exceeds "
                               f"relative tolerance for value {res.value:.6g}",
                               res.value, res.abs_error_estimate, res.evaluations)
    return res


# ---------------------------------------------------------------------------
# q over time


def _q_time_integral(params: ModelParams, dx: float, dy: float, r: float,
                     t_from: float = 0.0, t_to: float = math.inf) -> QuadratureResult:
    """``∫_{t_from}^{t_to} q(t) dt`` through ``u = r^α / t``."""
    d, al, a = params.d, params.alpha, params.a
    if r <= 0:
        raise SingularInputError("the time integral of q needs x != y")
    if dx == 0.0 or dy == 0.0:
        return ZERO
    R = r ** al
    px, py = phi(a, dx, al), phi(a, dy, al)

    def g(u):
        u = np.asarray(u, dtype=float)
        t = R / u
        return q_from_distances(params, t, dx, dy, r) * R / (u * u)

    u_lo = R / t_to if math.isfinite(t_to) else 0.0
    u_hi = R / t_from if t_from > 0 else math.inf
    kinks = sorted({R / (px * px), R / (py * py), a ** al, 1.0})
    inner = [k for k in kinks if u_lo < k < u_hi]
    res = ZERO
    # left end: u -> 0 is a pure power u^{d/α - 1} below every kink
    if u_lo == 0.0:
        u_a = min(kinks[0], u_hi)
        res += QuadratureResult(float(g(u_a)) * u_a / (d / al), 0.0, 1)
    else:
        u_a = u_lo
    # right end: u -> ∞ is a pure power u^{-3} above every kink
    if math.isinf(u_hi):
        u_b = max(kinks[-1], u_a)
        res += QuadratureResult(float(g(u_b)) * u_b / 2.0, 0.0, 1)
    else:
        u_b = u_hi
    if u_b > u_a:
        res += integrate_log(g, u_a, u_b, [k for k in inner if u_a < k < u_b], rtol=_PIECE_RTOL)
    return res


def integrate_q_over_time(params: ModelParams, domain: Domain, x, y) -> QuadratureResult:
    """``∫_0^∞ q^a_D(t, x, y) dt``; comparable to ``green_f``."""
    dx, dy, r = _points(domain, x, y)
    return _check(_q_time_integral(params, dx, dy, r), "integrate_q_over_time")


def q_time_integral_from_distances(params: ModelParams, dx, dy, r) -> QuadratureResult:
    return _check(_q_time_integral(params, float(dx), float(dy), float(r)), "q time integral")


# ---------------------------------------------------------------------------
# small-time piece I and large-time piece J


def _I_integral(params: ModelParams, c: float, dx: float, dy: float, r: float) -> QuadratureResult:
    d, al, a = params.d, params.alpha, params.a
    t_star, r_star = regime_thresholds(params)
    if r <= 0:
        raise SingularInputError("integrate_I needs x != y")
    if r > r_star * (1 + 1e-12):
        raise InputError(f"integrate_I needs |x-y| <= r_star = {r_star:g}, got {r:g}")
    if dx == 0.0 or dy == 0.0:
        return ZERO
    aa = a ** al

    def f(t):
        t = np.asarray(t, dtype=float)
        base = t ** (-d / 2.0)
        mixed = base * np.exp(-c * r * r / t) + np.minimum(aa * t / r ** (d + al), base)
        return boundary_factor(dx, t) * boundary_factor(dy, t) * mixed

    t_k = (r ** (d + al) / aa) ** (1.0 / (1.0 + d / 2.0))
    gauss = c * r * r
    scales = [dx * dx, dy * dy, t_k, gauss / 10.0, gauss, 10.0 * gauss]
    t_lo = min(t_star, 0.5 * min(dx * dx, dy * dy, t_k), gauss / 40.0)
    res = gauss_kronrod(f, 0.0, t_lo, [s for s in scales if s < t_lo], rtol=_PIECE_RTOL)
    if t_star > t_lo:
        res += integrate_log(f, t_lo, t_star, scales, rtol=_PIECE_RTOL)
    return res


def integrate_I(params: ModelParams, domain: Domain, c: float, x, y) -> QuadratureResult:
    """Small-time integral up to ``t_star`` of the mixed envelope; pairs with ``closed_I``."""
    dx, dy, r = _points(domain, x, y)
    return _check(_I_integral(params, c, dx, dy, r), "integrate_I")


def I_integral_from_distances(params: ModelParams, c: float, dx, dy, r) -> QuadratureResult:
    return _check(_I_integral(params, c, float(dx), float(dy), float(r)), "I integral")


def closed_I(params: ModelParams, dx, dy, r):
    """Closed-form comparison profile for ``integrate_I``."""
    d, al, a = params.d, params.alpha, params.a
    dd = np.asarray(dx, dtype=float) * np.asarray(dy, dtype=float)
    r = np.asarray(r, dtype=float)
    t_star, _ = regime_thresholds(params)
    if d >= 3:
        out = r ** (2.0 - d) * np.minimum(1.0, dd / (r * r))
    elif d == 2:
        out = np.log1p(np.minimum(t_star, dd) / (r * r))
    else:
        out = np.minimum(np.minimum(a ** (al / (al - 2.0)), np.sqrt(dd)), dd / r)
    return float(out) if np.ndim(out) == 0 else out


def _J_integral(params: ModelParams, dx: float, dy: float, r: float) -> QuadratureResult:
    t_star, r_star = regime_thresholds(params)
    if r > r_star * (1 + 1e-12):
        raise InputError(f"integrate_J needs |x-y| <= r_star = {r_star:g}, got {r:g}")
    return _q_time_integral(params, dx, dy, r, t_from=t_star)


def integrate_J(params: ModelParams, domain: Domain, x, y) -> QuadratureResult:
    """Large-time tail ``∫_{t_star}^∞ q^a_D dt``."""
    dx, dy, r = _points(domain, x, y)
    return _check(_J_integral(params, dx, dy, r), "integrate_J")


def J_integral_from_distances(params: ModelParams, dx, dy, r) -> QuadratureResult:
    return _check(_J_integral(params, float(dx), float(dy), float(r)), "J integral")


def J_bound_shape(dx, dy, r):
    """``1 ∧ δ_x δ_y / r^2``, the d >= 2 bound for the J tail."""
    return np.minimum(1.0, np.asarray(dx) * np.asarray(dy) / np.asarray(r) ** 2)


# ---------------------------------------------------------------------------
# half-line Green function envelope


def v_envelope(alpha: float, r):
    """Ladder-height potential density profile ``1 ∧ r^{α/2-1}`` (1 at r = 0)."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(r >= 1.0, r ** (alpha / 2.0 - 1.0), 1.0)
    return float(out) if out.ndim == 0 else out


def green_halfline_envelope(alpha: float, x: float, y: float) -> QuadratureResult:
    """``∫_0^{x∧y} v(z) v(z+|x-y|) dz`` with ``v = v_envelope``."""
    if x <= 0 or y <= 0:
        raise InputError("green_halfline_envelope needs x, y > 0")
    m, s = min(x, y), abs(x - y)

    def f(z):
        return v_envelope(alpha, z) * v_envelope(alpha, z + s)

    if m <= 1.0:
        kinks = [1.0 - s] if 0.0 < 1.0 - s < m else []
        return gauss_kronrod(f, 0.0, m, kinks, rtol=1e-10)
    res = gauss_kronrod(f, 0.0, 1.0, [1.0 - s] if 0.0 < 1.0 - s < 1.0 else [], rtol=1e-10)
    return res + integrate_log(f, 1.0, m, rtol=1e-10)


def prop21_shape(alpha: float, r: float, x: float) -> float:
    def p(z):
        return min(z, z ** (alpha / 2.0))

    return p(r) * min(p(x), p(r - x))


def _green_mass(alpha: float, r: float, x: float) -> QuadratureResult:
    # ∫_0^r G_env(x, y) dy
    def f(ys):
        return np.array([green_halfline_envelope(alpha, x, float(y)).value for y in np.atleast_1d(ys)])

    kinks = [p for p in (x, x - 1.0, x + 1.0, 1.0) if 0.0 < p < r]
    return gauss_kronrod(f, 0.0, r, kinks, rtol=1e-8)


def check_prop21(alpha: float, r: float, x: float) -> tuple[float, float]:
    """Return ``(lhs_envelope, rhs_shape)`` for the interval occupation bound.

    The left side bounds ``∫_0^r G_{(0,r)}(x, y) dy`` from above by the
    half-line envelope, taking the smaller of the two reflections
    ``x`` and ``r - x`` (the interval Green function is reflection
    symmetric, so both are valid upper surrogates).
    """
    if not 0.0 < x < r:
        raise InputError("check_prop21 needs 0 < x < r")
    lhs = min(_green_mass(alpha, r, x).value, _green_mass(alpha, r, r - x).value)
    return lhs, prop21_shape(alpha, r, x)


__all__ = [
    "QuadratureResult", "integrate_q_over_time", "integrate_I", "integrate_J", "closed_I",
    "J_bound_shape", "v_envelope", "green_halfline_envelope", "check_prop21", "prop21_shape",
    "q_time_integral_from_distances", "I_integral_from_distances", "J_integral_from_distances",
    "green_f_from_distances", "green_g_from_distances", "stable_form",
]
