"""Model parameters, domains and regime thresholds.

Points are numpy arrays whose last axis holds the coordinates; every
geometric routine broadcasts over the leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InputError, NoThresholdError


@dataclass(frozen=True)
class ModelParams:
    """Dimension ``d``, stability index ``alpha`` and jump weight ``a``.

    ``M`` is the uniformity cap on ``a`` carried for documentation only.
    """

    d: int
    alpha: float
    a: float
    M: float | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InputError(f"d must be an integer >= 1, got {self.d!r}")
        if not 0.0 < self.alpha < 2.0:
            raise InputError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        if not self.a >= 0.0 or not math.isfinite(self.a):
            raise InputError(f"a must be finite and >= 0, got {self.a!r}")
        if self.M is not None and self.M < self.a:
            raise InputError(f"M={self.M} is below a={self.a}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "a", float(self.a))

    def with_a(self, a: float) -> "ModelParams":
        return ModelParams(self.d, self.alpha, a, None if self.M is None else max(self.M, a))


def regime_thresholds(params: ModelParams) -> tuple[float, float]:
    """Return ``(t_star, r_star) = (a^{2α/(α-2)}, a^{-α/(2-α)})``.

    ``t_star`` is computed as ``r_star**2`` so the identity is exact.
    """
    if params.a == 0.0:
        raise NoThresholdError("a = 0: the stable part is absent and no finite threshold exists")
    r_star = params.a ** (-params.alpha / (2.0 - params.alpha))
    return r_star * r_star, r_star


def scale_exponent(params: ModelParams) -> float:
    """Exponent ``α/(2-α)``; lengths scale by ``a**scale_exponent`` to reach a = 1."""
    return params.alpha / (2.0 - params.alpha)


# ---------------------------------------------------------------------------
# Domains


def _as_points(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class HalfSpace:
    """``{x : x_d > b}``."""

    b: float = 0.0

    def contains(self, x) -> np.ndarray | bool:
        x = _as_points(x)
        out = x[..., -1] > self.b
        return bool(out) if out.ndim == 0 else out

    def delta(self, x):
        x = _as_points(x)
        out = np.maximum(x[..., -1] - self.b, 0.0)
        return float(out) if out.ndim == 0 else out

    def scaled(self, lam: float) -> "HalfSpace":
        return HalfSpace(self.b * lam)


@dataclass(frozen=True)
class SinusoidalHalfSpaceLike:
    """``{x : x_d > b1 + amplitude (1 + sin(2π x_1 / wavelength)) / 2}``.

    Sandwiched between ``HalfSpace(b2)`` and ``HalfSpace(b1)`` with
    ``b2 = b1 + amplitude``.  Requires ``d >= 2``.
    """

    b1: float = 0.0
    amplitude: float = 1.0
    wavelength: float = 2.0 * math.pi
    # samples per wavelength in the coarse scan that seeds golden-section search
    grid_per_period: int = field(default=48, compare=False, repr=False)

    def __post_init__(self):
        if self.amplitude < 0 or self.wavelength <= 0:
            raise InputError("amplitude must be >= 0 and wavelength > 0")

    @property
    def b2(self) -> float:
        return self.b1 + self.amplitude

    def height(self, s):
        k = 2.0 * math.pi / self.wavelength
        return self.b1 + 0.5 * self.amplitude * (1.0 + np.sin(k * np.asarray(s, dtype=float)))

    def contains(self, x):
        x = _as_points(x)
        if x.shape[-1] < 2:
            raise InputError("the sinusoidal domain needs d >= 2")
        out = x[..., -1] > self.height(x[..., 0])
        return bool(out) if out.ndim == 0 else out

    def delta(self, x):
        x = _as_points(x)
        if x.shape[-1] < 2:
            raise InputError("the sinusoidal domain needs d >= 2")
        shape = x.shape[:-1]
        out = _sinusoid_distance(self, x[..., 0].ravel(), x[..., -1].ravel()).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def scaled(self, lam: float) -> "SinusoidalHalfSpaceLike":
        return SinusoidalHalfSpaceLike(self.b1 * lam, self.amplitude * lam, self.wavelength * lam,
                                       self.grid_per_period)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _sinusoid_distance(dom: SinusoidalHalfSpaceLike, x1: np.ndarray, xd: np.ndarray) -> np.ndarray:
    # Distance from (x1, xd) to the graph s -> height(s).  The minimiser lies
    # within |s - x1| <= w, w^2 = v^2 - (xd - b2)^2, v = vertical gap.
    k = 2.0 * math.pi / dom.wavelength
    A = 0.5 * dom.amplitude
    mid = dom.b1 + A
    v = xd - dom.height(x1)
    out = np.zeros_like(x1)
    inside = v > 0
    if not inside.any() or dom.amplitude == 0.0:
        out[inside] = v[inside]
        return out
    x1 = x1[inside]
    xd = xd[inside]
    v = v[inside]
    low = np.maximum(xd - dom.b2, 0.0)
    w = np.sqrt(np.maximum(v * v - low * low, 0.0))

    def f(s):
        h = mid + A * np.sin(k * s)
        return (s - x1[:, None]) ** 2 + (xd[:, None] - h) ** 2

    periods = max(float(np.max(2.0 * w)) / dom.wavelength, 1.0)
    m = int(min(max(dom.grid_per_period * periods, 16), 20000)) + 1
    frac = np.linspace(-1.0, 1.0, m)
    s = x1[:, None] + w[:, None] * frac[None, :]
    F = f(s)
    # keep a few of the best interior local minima of the coarse scan
    n_keep = min(4, m)
    pad = np.pad(F, ((0, 0), (1, 1)), constant_values=np.inf)
    is_min = (F <= pad[:, :-2]) & (F <= pad[:, 2:])
    cand = np.where(is_min, F, np.inf)
    idx = np.argpartition(cand, n_keep - 1, axis=1)[:, :n_keep] if m > n_keep else np.tile(np.arange(m), (len(x1), 1))
    step = (2.0 * w / (m - 1))[:, None]
    lo = np.take_along_axis(s, idx, axis=1) - step
    hi = lo + 2.0 * step
    xs = np.repeat(x1[:, None], idx.shape[1], axis=1)
    xds = np.repeat(xd[:, None], idx.shape[1], axis=1)

    def g(t):
        h = mid + A * np.sin(k * t)
        return (t - xs) ** 2 + (xds - h) ** 2

    # golden-section search on each bracket
    c = hi - _GOLDEN * (hi - lo)
    e = lo + _GOLDEN * (hi - lo)
    fc, fe = g(c), g(e)
    for _ in range(60):
        left = fc < fe
        hi = np.where(left, e, hi)
        lo = np.where(left, lo, c)
        c_new = hi - _GOLDEN * (hi - lo)
        e_new = lo + _GOLDEN * (hi - lo)
        c, e = np.where(left, c_new, e), np.where(left, c, e_new)
        fc, fe = np.where(left, g(c_new), fe), np.where(left, fc, g(e_new))
        if np.all(hi - lo < 1e-12 * (1.0 + np.abs(lo))):
            break
    t = 0.5 * (lo + hi)
    # Newton polish on the stationarity condition
    for _ in range(3):
        h = mid + A * np.sin(k * t)
        h1 = A * k * np.cos(k * t)
        h2 = -A * k * k * np.sin(k * t)
        g1 = (t - xs) - (xds - h) * h1
        g2 = 1.0 + h1 * h1 - (xds - h) * h2
        t_new = np.where(g2 > 0, t - g1 / np.where(g2 > 0, g2, 1.0), t)
        better = g(t_new) <= g(t)
        t = np.where(better, t_new, t)
    best = np.sqrt(np.min(g(t), axis=1))
    out[inside] = np.minimum(best, v)
    return out


@dataclass(frozen=True)
class Box:
    """Open box ``prod_i (lo_i, hi_i)``; infinite sides are allowed."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(l >= h for l, h in zip(lo, hi)):
            raise InputError("Box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def bounded(self) -> bool:
        return all(map(math.isfinite, self.lo + self.hi))

    def contains(self, x):
        x = _as_points(x)
        out = np.all((x > np.array(self.lo)) & (x < np.array(self.hi)), axis=-1)
        return bool(out) if out.ndim == 0 else out

    def delta(self, x):
        x = _as_points(x)
        gaps = np.minimum(x - np.array(self.lo), np.array(self.hi) - x)
        out = np.maximum(np.min(gaps, axis=-1), 0.0)
        return float(out) if out.ndim == 0 else out

    def scaled(self, lam: float) -> "Box":
        return Box(tuple(v * lam for v in self.lo), tuple(v * lam for v in self.hi))


def Interval(lo: float, hi: float) -> Box:
    return Box((lo,), (hi,))


@dataclass(frozen=True)
class Ball:
    """Open ball ``B(center, radius)``."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.radius <= 0:
            raise InputError("radius must be positive")

    @property
    def d(self) -> int:
        return len(self.center)

    bounded = True

    def contains(self, x):
        x = _as_points(x)
        out = np.linalg.norm(x - np.array(self.center), axis=-1) < self.radius
        return bool(out) if out.ndim == 0 else out

    def delta(self, x):
        x = _as_points(x)
        out = np.maximum(self.radius - np.linalg.norm(x - np.array(self.center), axis=-1), 0.0)
        return float(out) if out.ndim == 0 else out

    def scaled(self, lam: float) -> "Ball":
        return Ball(tuple(v * lam for v in self.center), self.radius * lam)


Domain = Union[HalfSpace, SinusoidalHalfSpaceLike, Box, Ball]


def contains(domain: Domain, x):
    """True iff ``x`` lies in the open set (boundary points excluded)."""
    return domain.contains(x)


def delta(domain: Domain, x):
    """Euclidean distance from ``x`` to the complement (0 outside)."""
    return domain.delta(x)


def scaled_domain(domain: Domain, lam: float) -> Domain:
    """Image of ``domain`` under ``x -> lam x``."""
    return domain.scaled(lam)


def point(*coords) -> np.ndarray:
    return np.asarray(coords, dtype=float)
