"""Adaptive 7/15-point Gauss-Kronrod integration with a global error heap."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

# full 15-point rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(self.value + other.value,
                                self.abs_error_estimate + other.abs_error_estimate,
                                self.evaluations + other.evaluations)

    def scaled(self, c: float) -> "QuadratureResult":
        return QuadratureResult(c * self.value, abs(c) * self.abs_error_estimate, self.evaluations)


ZERO = QuadratureResult(0.0, 0.0, 0)


def _rule(f, a, b):
    h = 0.5 * (b - a)
    c = 0.5 * (a + b)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ConvergenceError(f"non-finite integrand on [{a!r}, {b!r}]")
    k = h * np.dot(_WK, fx)
    g = h * np.dot(_WG15, fx)
    # QUADPACK error heuristic
    mean = 0.5 * k / h if h else 0.0
    resasc = abs(h) * np.dot(_WK, np.abs(fx - mean))
    err = abs(k - g)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    resabs = abs(h) * np.dot(_WK, np.abs(fx))
    eps = np.finfo(float).eps
    if resabs > np.finfo(float).tiny / (50 * eps):
        err = max(50 * eps * resabs, err)
    return float(k), float(err)


def gauss_kronrod(f, a: float, b: float, points=(), rtol: float = 1e-10, atol: float = 0.0,
                  limit: int = 2000) -> QuadratureResult:
    """Integrate vectorised ``f`` over the finite interval ``[a, b]``.

    ``points`` are interior break points (kinks) used as initial
    subdivision.  The interval with the largest error estimate is bisected
    until the summed estimate meets ``max(atol, rtol * |value|)``.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("gauss_kronrod needs finite limits; map infinite ranges first")
    if a == b:
        return ZERO
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = sorted({a, b, *(p for p in points if a < p < b)})
    heap = []
    total, total_err, evals = 0.0, 0.0, 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = _rule(f, lo, hi)
        evals += 15
        total += v
        total_err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    while total_err > max(atol, rtol * abs(total)):
        if len(heap) >= limit:
            raise ConvergenceError(
                f"no convergence after {len(heap)} subintervals: value={total!r}, "
                f"error={total_err!r}", total, total_err, evals)
        e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ConvergenceError("interval collapsed below machine resolution",
                                   total, total_err, evals)
        v1, e1 = _rule(f, lo, mid)
        v2, e2 = _rule(f, mid, hi)
        evals += 30
        total += v1 + v2 - v
        total_err += e1 + e2 + e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        if len(heap) % 64 == 0:
            # resum to shed accumulated rounding in the running totals
            total = sum(item[3] for item in heap)
            total_err = sum(-item[0] for item in heap)
    return QuadratureResult(sign * total, total_err, evals)


def integrate_log(f, lo: float, hi: float, points=(), rtol: float = 1e-10, atol: float = 0.0,
                  limit: int = 2000) -> QuadratureResult:
    """Integrate over ``[lo, hi]`` (``0 < lo``) in the variable ``s = log x``."""
    if not 0.0 < lo <= hi:
        raise ValueError("integrate_log needs 0 < lo <= hi")

    def g(s):
        x = np.exp(s)
        return f(x) * x

    logs = [math.log(p) for p in points if lo < p < hi]
    return gauss_kronrod(g, math.log(lo), math.log(hi), logs, rtol, atol, limit)


def integrate_power_left(f, a: float, b: float, gamma: float, rtol: float = 1e-10,
                         atol: float = 0.0, limit: int = 2000) -> QuadratureResult:
    """Integrate ``f ~ (x-a)^{gamma-1}`` near ``a`` via ``x = a + (b-a) w^{1/gamma}``."""
    span = b - a

    def g(w):
        z = w ** (1.0 / gamma)
        return f(a + span * z) * span * z / (gamma * w)

    return gauss_kronrod(g, 0.0, 1.0, (), rtol, atol, limit)
