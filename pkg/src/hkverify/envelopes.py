"""Closed-form envelope and Green-function evaluators.

Every ``*_from_distances`` core takes distances to the complement and the
separation ``r = |x - y|`` and broadcasts over numpy arrays.  The
domain-aware wrappers compute those quantities and validate membership.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularInputError
from .model import Domain, ModelParams, regime_thresholds


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class ComparabilityConstants:
    """Multiplicative constant ``c_outer`` and Gaussian-exponent constant ``c_exp``."""

    c_outer: float = 1.0
    c_exp: float = 1.0

    def __post_init__(self):
        if self.c_outer < 1.0 or self.c_exp < 1.0:
            raise InputError("comparability constants must both be >= 1")


@dataclass(frozen=True)
class EnvelopePair:
    lower: float | np.ndarray
    upper: float | np.ndarray
    constants: ComparabilityConstants

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


# ---------------------------------------------------------------------------
# scalar profiles


def phi(a, r, alpha):
    """``r ∧ (r/a)^{α/2}``; for ``a = 0`` this is ``r``."""
    if isinstance(r, float) and isinstance(a, float):
        if r < 0 or a < 0:
            raise InputError("phi needs r >= 0 and a >= 0")
        return min(r, (r / a) ** (alpha / 2.0)) if a > 0 else r
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.any(r < 0) or np.any(a < 0):
        raise InputError("phi needs r >= 0 and a >= 0")
    with np.errstate(divide="ignore"):
        out = np.where(a > 0, np.minimum(r, (r / np.where(a > 0, a, 1.0)) ** (alpha / 2.0)), r)
    return _scalar(out)


def levy_exponent(params: ModelParams, r):
    """Radial Lévy exponent ``r^2 + a^α r^α``."""
    r = np.asarray(r, dtype=float)
    return _scalar(r * r + params.a ** params.alpha * r ** params.alpha)


def stable_constant(d: int, alpha: float) -> float:
    """Normalising constant of the fractional Laplacian kernel.

    ``α 2^{α-1} π^{-d/2} Γ((d+α)/2) / Γ(1-α/2)``.
    """
    if not 0.0 < alpha < 2.0:
        raise InputError(f"alpha must lie in (0, 2), got {alpha}")
    return (alpha * 2.0 ** (alpha - 1.0) * math.pi ** (-d / 2.0)
            * math.gamma((d + alpha) / 2.0) / math.gamma(1.0 - alpha / 2.0))


def jump_intensity(params: ModelParams, r):
    """``a^α A(d,α) r^{-(d+α)}``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularInputError("jump intensity is singular at r = 0")
    if params.a == 0.0:
        return _scalar(np.zeros_like(r))
    c = params.a ** params.alpha * stable_constant(params.d, params.alpha)
    return _scalar(c * r ** (-(params.d + params.alpha)))


def stable_form(params: ModelParams, t, r):
    """``(a^α t)^{-d/α} ∧ a^α t / r^{d+α}``."""
    if params.a == 0.0:
        raise InputError("stable form undefined for a = 0")
    d, al = params.d, params.alpha
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    s = params.a ** al * t
    with np.errstate(divide="ignore"):
        jump = np.where(r > 0, s / np.where(r > 0, r, 1.0) ** (d + al), np.inf)
    return _scalar(np.minimum(s ** (-d / al), jump))


def h_envelope(params: ModelParams, C, t, r):
    """Free-space heat kernel envelope ``h^a_C(t, x, y)`` with ``r = |x-y|``."""
    d = params.d
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    gauss = t ** (-d / 2.0) * np.exp(-C * r * r / t)
    if params.a == 0.0:
        return _scalar(gauss)
    cap = np.minimum(t ** (-d / 2.0), (params.a ** params.alpha * t) ** (-d / params.alpha))
    return _scalar(np.minimum(cap, gauss + stable_form(params, t, r)))


def boundary_factor(scale, t):
    """``1 ∧ scale/√t``."""
    return np.minimum(1.0, np.asarray(scale, dtype=float) / np.sqrt(t))


# ---------------------------------------------------------------------------
# domain helpers


def _dist_and_sep(domain: Domain, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(domain.contains(x)) or not np.all(domain.contains(y)):
        raise InputError("points must lie inside the domain")
    return domain.delta(x), domain.delta(y), np.linalg.norm(x - y, axis=-1)


def q_from_distances(params: ModelParams, t, dx, dy, r):
    al, a = params.alpha, params.a
    if a == 0.0:
        raise InputError("q-form needs a > 0")
    fx = boundary_factor(phi(a, dx, al), t)
    fy = boundary_factor(phi(a, dy, al), t)
    return _scalar(fx * fy * stable_form(params, t, r))


def q_form(params: ModelParams, domain: Domain, t, x, y):
    """Stable-regime Dirichlet form ``q^a_D(t, x, y)``."""
    dx, dy, r = _dist_and_sep(domain, x, y)
    return q_from_distances(params, t, dx, dy, r)


def _small_time_form(params, t, r, c_gauss):
    d = params.d
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    base = t ** (-d / 2.0)
    with np.errstate(divide="ignore"):
        jump = np.where(r > 0, params.a ** params.alpha * t / np.where(r > 0, r, 1.0) ** (d + params.alpha), np.inf)
    return base * np.exp(-c_gauss * r * r / t) + np.minimum(base, jump)


def dirichlet_envelope_from_distances(params: ModelParams, t, dx, dy, r,
                                      k: ComparabilityConstants = ComparabilityConstants()) -> EnvelopePair:
    c, ce = k.c_outer, k.c_exp
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if params.a == 0.0:
        bb = boundary_factor(dx, t) * boundary_factor(dy, t)
        base = t ** (-params.d / 2.0)
        lower = bb * base * np.exp(-ce * r * r / t) / c
        upper = c * bb * base * np.exp(-r * r / (ce * t))
        return EnvelopePair(_scalar(lower), _scalar(upper), k)

    t_star, _ = regime_thresholds(params)
    bb = boundary_factor(dx, t) * boundary_factor(dy, t)
    lo1 = bb * _small_time_form(params, t, r, ce) / c
    up1 = c * bb * _small_time_form(params, t, r, 1.0 / ce)
    q = q_from_distances(params, t, dx, dy, r)
    lo2, up2 = q / c, c * q
    at_seam = np.abs(t - t_star) <= 1e-12 * t_star
    small = t < t_star
    lower = np.where(at_seam, np.minimum(lo1, lo2), np.where(small, lo1, lo2))
    upper = np.where(at_seam, np.maximum(up1, up2), np.where(small, up1, up2))
    return EnvelopePair(_scalar(lower), _scalar(upper), k)


def dirichlet_envelope(params: ModelParams, domain: Domain, t, x, y,
                       k: ComparabilityConstants = ComparabilityConstants()) -> EnvelopePair:
    """Two-sided Dirichlet heat kernel envelope, split at ``t_star``.

    Below ``t_star`` the boundary factors use ``δ`` and the mixed
    Gaussian-plus-jump profile; above it the pair is ``c^{∓1} q^a_D``.
    At ``t = t_star`` the wider of the two pairs is returned.
    """
    dx, dy, r = _dist_and_sep(domain, x, y)
    return dirichlet_envelope_from_distances(params, t, dx, dy, r, k)


def survival_envelope_from_distance(params: ModelParams, t, dx,
                                    k: ComparabilityConstants = ComparabilityConstants()) -> EnvelopePair:
    f = boundary_factor(phi(params.a, dx, params.alpha), t)
    return EnvelopePair(_scalar(f / k.c_outer), _scalar(f * k.c_outer), k)


def survival_envelope(params: ModelParams, domain: Domain, t, x,
                      k: ComparabilityConstants = ComparabilityConstants()) -> EnvelopePair:
    if not np.all(domain.contains(x)):
        raise InputError("x must lie inside the domain")
    return survival_envelope_from_distance(params, t, domain.delta(x), k)


# ---------------------------------------------------------------------------
# Green-function forms


def green_f_from_distances(params: ModelParams, dx, dy, r):
    d, al, a = params.d, params.alpha, params.a
    if a == 0.0:
        raise InputError("green_f needs a > 0")
    r = np.asarray(r, dtype=float)
    px = np.asarray(phi(a, dx, al))
    py = np.asarray(phi(a, dy, al))
    with np.errstate(divide="ignore", invalid="ignore"):
        if d > al:
            if np.any(r <= 0):
                raise SingularInputError("green_f is singular at x = y when d > alpha")
            cap = a ** (-al / 2.0)
            out = (np.minimum(cap, px / r ** (al / 2.0)) * np.minimum(cap, py / r ** (al / 2.0))
                   / r ** (d - al))
        elif d == 1 and al == 1.0:
            if np.any(r <= 0):
                raise SingularInputError("green_f is infinite at x = y when d = alpha = 1")
            out = np.log1p(a * px * py / r) / a
        else:
            pp = px * py
            near = np.where(r > 0, pp / np.where(r > 0, r, 1.0), np.inf)
            out = np.minimum(near, pp ** ((al - 1.0) / al) / a)
    return _scalar(out)


def green_f(params: ModelParams, domain: Domain, x, y):
    """Green-function profile valid for ``|x - y| >= r_star``."""
    dx, dy, r = _dist_and_sep(domain, x, y)
    return green_f_from_distances(params, dx, dy, r)


def green_g_from_distances(params: ModelParams, dx, dy, r):
    d, al, a = params.d, params.alpha, params.a
    if a == 0.0:
        raise InputError("green_g needs a > 0")
    r = np.asarray(r, dtype=float)
    dd = np.asarray(dx, dtype=float) * np.asarray(dy, dtype=float)
    t_star, _ = regime_thresholds(params)
    with np.errstate(divide="ignore", invalid="ignore"):
        if d >= 3:
            if np.any(r <= 0):
                raise SingularInputError("green_g is singular at x = y when d >= 3")
            out = r ** (2.0 - d) * np.minimum(1.0, dd / (r * r))
        elif d == 2:
            out = np.where(r > 0, np.log1p(np.minimum(t_star, dd) / np.where(r > 0, r * r, 1.0)), np.inf)
        else:
            near = np.where(r > 0, dd / np.where(r > 0, r, 1.0), np.inf)
            if al > 1.0:
                out = np.minimum(np.minimum(np.sqrt(dd), near), a ** (-al) * dd ** ((al - 1.0) / 2.0))
            elif al == 1.0:
                out = np.minimum(near, np.log1p(a * np.sqrt(dd)) / a)
            else:
                out = np.minimum(np.minimum(np.sqrt(dd), near), a ** (al / (al - 2.0)))
    return _scalar(out)


def green_g(params: ModelParams, domain: Domain, x, y):
    """Green-function profile valid for ``|x - y| <= r_star``."""
    dx, dy, r = _dist_and_sep(domain, x, y)
    return green_g_from_distances(params, dx, dy, r)
