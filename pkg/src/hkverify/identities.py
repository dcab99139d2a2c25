"""Exact scaling identities, the φ sandwich, regime tests and the constant Λ(α, p)."""

from __future__ import annotations

import math

import numpy as np

from .envelopes import h_envelope, phi, q_form, stable_constant, stable_form
from .errors import InputError
from .gk import gauss_kronrod, integrate_power_left
from .model import Domain, HalfSpace, ModelParams, regime_thresholds, scale_exponent

TINY = 1e-300


def relative_error(lhs, rhs):
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    out = np.abs(lhs - rhs) / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), TINY)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# scaling


def check_scaling_q(params: ModelParams, domain: Domain, s: float, x, y) -> float:
    """Compare ``q^a_D(a^{-2α/(2-α)} s, x, y)`` with ``a^{αd/(2-α)} q^1_{D_a}(s, x_a, y_a)``."""
    if params.a <= 0:
        raise InputError("scaling needs a > 0")
    e = scale_exponent(params)
    lam = params.a ** e
    lhs = q_form(params, domain, params.a ** (-2.0 * e) * s, x, y)
    unit = params.with_a(1.0)
    rhs = params.a ** (params.d * e) * q_form(unit, domain.scaled(lam), s,
                                              lam * np.asarray(x, float), lam * np.asarray(y, float))
    return relative_error(lhs, rhs)


def check_scaling_phi(params: ModelParams, domain: Domain, x) -> float:
    """Compare ``φ_a(δ_D(x))`` with ``a^{-α/(2-α)} φ_1(δ_{D_a}(x_a))``."""
    if params.a <= 0:
        raise InputError("scaling needs a > 0")
    e = scale_exponent(params)
    lam = params.a ** e
    lhs = phi(params.a, domain.delta(x), params.alpha)
    rhs = phi(1.0, domain.scaled(lam).delta(lam * np.asarray(x, float)), params.alpha) / lam
    return relative_error(lhs, rhs)


def check_free_scaling(params: ModelParams, lam: float, t: float, r: float, C: float) -> float:
    """Compare ``h^{aλ^{(α-2)/α}}_C(t, r)`` with ``λ^{-d} h^a_C(λ^{-2} t, λ^{-1} r)``."""
    if params.a <= 0:
        raise InputError("scaling needs a > 0")
    al = params.alpha
    lhs = h_envelope(params.with_a(params.a * lam ** ((al - 2.0) / al)), C, t, r)
    rhs = lam ** (-params.d) * h_envelope(params, C, t / (lam * lam), r / lam)
    return relative_error(lhs, rhs)


def sweep_scaling(n: int = 10_000, seed: int = 0, dims=(1, 2, 3)) -> dict[str, float]:
    """Max relative error of the three scaling checks over ``n`` random tuples."""
    rng = np.random.default_rng(seed)
    worst = {"check_scaling_q": 0.0, "check_scaling_phi": 0.0, "check_free_scaling": 0.0}
    d_all = rng.choice(np.asarray(dims), n)
    alpha, a = rng.uniform(0.2, 1.8, n), rng.uniform(0.1, 10.0, n)
    b = rng.uniform(-2.0, 2.0, n)
    xs, ys = rng.normal(size=(n, max(dims))) * 3, rng.normal(size=(n, max(dims))) * 3
    hx, hy = 10 ** rng.uniform(-2, 2, n), 10 ** rng.uniform(-2, 2, n)
    s = 10 ** rng.uniform(-3, 3, n)
    lam, t, r = 10 ** rng.uniform(-2, 2, n), 10 ** rng.uniform(-3, 3, n), 10 ** rng.uniform(-3, 2, n)
    C = rng.uniform(0.1, 5.0, n)
    for i in range(n):
        d = int(d_all[i])
        params = ModelParams(d, float(alpha[i]), float(a[i]))
        dom = HalfSpace(float(b[i]))
        x, y = xs[i, :d].copy(), ys[i, :d].copy()
        x[-1] = dom.b + hx[i]
        y[-1] = dom.b + hy[i]
        e_q = check_scaling_q(params, dom, float(s[i]), x, y)
        e_phi = check_scaling_phi(params, dom, x)
        e_h = check_free_scaling(params, float(lam[i]), float(t[i]), float(r[i]), float(C[i]))
        worst["check_scaling_q"] = max(worst["check_scaling_q"], e_q)
        worst["check_scaling_phi"] = max(worst["check_scaling_phi"], e_phi)
        worst["check_free_scaling"] = max(worst["check_free_scaling"], e_h)
    return worst


# ---------------------------------------------------------------------------
# φ sandwich


def phi_sandwich_values(r_scale, delta_x, delta_y, sep, alpha):
    """Unchecked ``(lower, middle, upper)``; broadcasts over arrays."""
    sep = np.asarray(sep, dtype=float)
    root = sep ** (alpha / 2.0)
    fx = r_scale * np.asarray(phi(1.0, delta_x, alpha)) / root
    fy = r_scale * np.asarray(phi(1.0, delta_y, alpha)) / root
    middle = np.minimum(1.0, fx) * np.minimum(1.0, fy)
    upper = np.minimum(1.0, fx * fy)
    return 0.5 * upper, middle, upper


def phi_sandwich(r_scale, delta_x, delta_y, sep, alpha):
    """Both sides of ``½(1∧u) ≤ (1∧√u_x)(1∧√u_y) ≤ 1∧u`` with ``φ = φ_1``.

    Needs ``0 < r_scale <= 1`` and ``|δ_x - δ_y| <= sep``.
    """
    r_scale = np.asarray(r_scale, dtype=float)
    if np.any(r_scale <= 0) or np.any(r_scale > 1):
        raise InputError("r_scale must lie in (0, 1]")
    if np.any(np.abs(np.asarray(delta_x) - np.asarray(delta_y)) > np.asarray(sep)) or np.any(np.asarray(sep) <= 0):
        raise InputError("inconsistent geometry: need |delta_x - delta_y| <= sep, sep > 0")
    lower, middle, upper = phi_sandwich_values(r_scale, delta_x, delta_y, sep, alpha)
    if np.any(lower > middle) or np.any(middle > upper):
        raise AssertionError("phi sandwich chain violated")
    if np.ndim(lower) == 0:
        return float(lower), float(middle), float(upper)
    return lower, middle, upper


def sweep_phi_sandwich(n: int = 1_000_000, seed: int = 0) -> int:
    """Number of chain violations over ``n`` random consistent samples."""
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(0.01, 1.99, n)
    r_scale = rng.uniform(0.0, 1.0, n)
    r_scale[r_scale == 0] = 1.0
    sep = 10 ** rng.uniform(-3, 3, n)
    dx = 10 ** rng.uniform(-4, 4, n) * rng.integers(0, 2, n)
    dy = np.maximum(dx + sep * rng.uniform(-1.0, 1.0, n), 0.0)
    lower, middle, upper = phi_sandwich_values(r_scale, dx, dy, sep, alpha)
    return int(np.count_nonzero((lower > middle) | (middle > upper)))


# ---------------------------------------------------------------------------
# regime classification


STABLE = "stable_comparable"
MIXED = "mixed"


def regime_classify(params: ModelParams, t: float, r: float, c1: float) -> str:
    t_star, r_star = regime_thresholds(params)
    return STABLE if (t >= c1 * t_star or r >= r_star) else MIXED


def _prop12_chunk(params, c1, C, n, seq):
    rng = np.random.default_rng(seq)
    t_star, r_star = regime_thresholds(params)
    t = c1 * t_star * 10 ** rng.uniform(0.0, max(math.log10(1e4 / c1), 0.0), n)
    r = r_star * 10 ** rng.uniform(0.0, 3.0, n)
    ratio = np.asarray(h_envelope(params, C, t, r)) / np.asarray(stable_form(params, t, r))
    return float(ratio.min()), float(ratio.max())


def check_prop12_band(params: ModelParams, c1: float, samples: int, seed: int, C: float = 1.0,
                      chunk: int = 4096) -> tuple[float, float]:
    """Observed range of ``h^a_C / stable_form`` in the stable-comparable region.

    ``t`` is log-uniform on ``[c1 t_star, 1e4 t_star]`` and ``r`` on
    ``[r_star, 1e3 r_star]``.  Samples are
    drawn in fixed chunks from spawned seed sequences so the result is
    independent of how chunks are scheduled.
    """
    if params.a <= 0:
        raise InputError("check_prop12_band needs a > 0")
    n_chunks = max(1, -(-samples // chunk))
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    lo, hi = math.inf, 0.0
    left = samples
    for seq in seqs:
        m = min(chunk, left)
        left -= m
        a, b = _prop12_chunk(params, c1, C, m, seq)
        lo, hi = min(lo, a), max(hi, b)
    return lo, hi


# ---------------------------------------------------------------------------
# Λ(α, p) and the power identity


def _t_integral(alpha: float, p: float) -> float:
    """``∫_0^1 (t^{α-p-1} - t^{p-1}) / (1-t)^α dt``."""
    if p == alpha - p:
        return 0.0
    # [0, 1/2]: t^{β-1}(1-t)^{-α} = t^{β-1} + t^{β-1}((1-t)^{-α} - 1), first part exact
    head = 0.0
    for beta, sign in ((alpha - p, 1.0), (p, -1.0)):
        rest = integrate_power_left(
            lambda t, b=beta: t ** (b - 1.0) * np.expm1(-alpha * np.log1p(-t)), 0.0, 0.5, beta + 1.0,
            rtol=1e-13).value
        head += sign * (0.5 ** beta / beta + rest)

    # [1/2, 1] in s = 1 - t; numerator via expm1, leading term -(α-2p)s exact
    k = alpha - 2.0 * p

    def tail(s):
        lt = np.log1p(-s)
        return (np.exp((p - 1.0) * lt) * np.expm1(k * lt) + k * s) * s ** (-alpha)

    body = -k * 0.5 ** (2.0 - alpha) / (2.0 - alpha)
    body += integrate_power_left(tail, 0.0, 0.5, 3.0 - alpha, rtol=1e-13, atol=1e-16 * abs(body)).value
    return head + body


def hemisphere_moment(d: int, alpha: float) -> float:
    """``∫_{|y|=1, y_d >= 0} y_d^α σ(dy)``; 1 in d = 1 (Dirac convention)."""
    if d == 1:
        return 1.0
    sphere = 2.0 * math.pi ** ((d - 1) / 2.0) / math.gamma((d - 1) / 2.0)
    beta = math.exp(math.lgamma((alpha + 1) / 2.0) + math.lgamma((d - 1) / 2.0)
                    - math.lgamma((alpha + d) / 2.0))
    return 0.5 * sphere * beta


def lambda_constant(d: int, alpha: float, p: float) -> float:
    """Constant ``Λ`` with ``Δ^{α/2} (x_d^+)^p = Λ (x_d^+)^{p-α}`` on the half-space."""
    if not 0.0 < p < alpha < 2.0:
        raise InputError("lambda_constant needs 0 < p < alpha < 2")
    T = _t_integral(alpha, p)
    if T == 0.0:
        return 0.0
    return p * stable_constant(d, alpha) / alpha * T * hemisphere_moment(d, alpha)


def _binom(p, k):
    out = 1.0
    for i in range(k):
        out *= (p - i) / (i + 1)
    return out


def _second_difference_tail(p, sigma):
    # (1+σ)^p + (1-σ)^p - 2 - p(p-1)σ^2 without cancellation
    sigma = np.asarray(sigma, dtype=float)
    direct = (np.expm1(p * np.log1p(sigma)) + np.expm1(p * np.log1p(-sigma))
              - p * (p - 1.0) * sigma * sigma)
    series = sum(2.0 * _binom(p, k) * sigma ** k for k in (4, 6, 8, 10, 12))
    return np.where(sigma < 1e-2, series, direct)


def fractional_laplacian_power(alpha: float, p: float, xd: float) -> float:
    """Principal-value ``Δ^{α/2} (x^+)^p`` at ``x = xd > 0`` in one dimension.

    The near field ``|y - x| < x/2`` is symmetrised so the first-order
    Taylor term cancels, and the second-order term is integrated exactly;
    the far field is integrated with endpoint substitutions
    and the ``y < 0`` part is analytic.
    """
    if not 0.0 < p < alpha < 2.0:
        raise InputError("need 0 < p < alpha < 2")
    if xd <= 0:
        raise InputError("xd must be positive")
    x, h = float(xd), 0.5 * float(xd)
    xp = x ** p
    scale = xp * x ** (-alpha)
    negative = -scale / alpha

    near = p * (p - 1.0) * x ** (p - 2.0) * h ** (2.0 - alpha) / (2.0 - alpha)
    near += gauss_kronrod(lambda s: xp * _second_difference_tail(p, s / x) * s ** (-1.0 - alpha),
                          0.0, h, rtol=1e-12, atol=1e-14 * scale).value

    # ∫_0^{x/2} (y^p - x^p)(x-y)^{-1-α} dy
    low = integrate_power_left(lambda y: y ** p * (x - y) ** (-1.0 - alpha), 0.0, h, p + 1.0,
                               rtol=1e-12, atol=1e-14 * scale).value
    low -= xp * (h ** (-alpha) - x ** (-alpha)) / alpha

    # ∫_{3x/2}^∞ (y^p - x^p)(y-x)^{-1-α} dy; with y = x/u the first part is
    # x^{p-α} ∫_0^{2/3} u^{γ-1} (1-u)^{-1-α} du, γ = α - p
    g = alpha - p
    u0 = x / (x + h)
    rest = integrate_power_left(lambda u: u ** (g - 1.0) * np.expm1(-(1.0 + alpha) * np.log1p(-u)),
                                0.0, u0, g + 1.0, rtol=1e-12, atol=1e-14 * scale).value
    high = x ** (p - alpha) * (u0 ** g / g + rest)
    high -= xp * h ** (-alpha) / alpha
    return stable_constant(1, alpha) * (negative + near + low + high)


def power_identity_sides(alpha: float, p: float, xd: float) -> tuple[float, float]:
    """``(principal value, Λ xd^{p-α})`` in one dimension."""
    return fractional_laplacian_power(alpha, p, xd), lambda_constant(1, alpha, p) * xd ** (p - alpha)


def check_power_identity(alpha: float, p: float, xd: float) -> float:
    lhs, rhs = power_identity_sides(alpha, p, xd)
    return relative_error(lhs, rhs)


__all__ = [
    "check_scaling_q", "check_scaling_phi", "check_free_scaling", "sweep_scaling",
    "phi_sandwich", "phi_sandwich_values", "sweep_phi_sandwich", "regime_classify",
    "check_prop12_band", "lambda_constant", "hemisphere_moment", "check_power_identity",
    "power_identity_sides", "fractional_laplacian_power", "relative_error", "STABLE", "MIXED",
]
