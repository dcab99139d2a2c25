"""Counter-based per-path random streams (SplitMix64) and stable samplers.

Stream ``i`` of master seed ``s`` is a pure function of ``(s, i)``, so a
batch of paths gives bit-identical results however it is split across
threads.  All arithmetic stays in uint64 inside numba.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SALT = np.uint64(0x632BE59BD9B4E019)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 2.0 ** -53


@nb.njit(inline="always", cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(inline="always", cache=True)
def stream_key(seed, index):
    return mix64(mix64(seed) ^ (np.uint64(index) * _GAMMA + _SALT))


@nb.njit(inline="always", cache=True)
def uniform(key, ctr):
    """Uniform on the open interval (0, 1); returns ``(u, ctr + 1)``."""
    z = mix64(key + (ctr + _ONE) * _GAMMA)
    return (float(z >> _S11) + 0.5) * _TWO_M53, ctr + _ONE


def _zig_tables(blocks: int = 128, r: float = 3.442619855899, v: float = 9.91256303526217e-3):
    # layer abscissae and acceptance ratios for the 128-block ziggurat
    x = np.empty(blocks + 1)
    f = math.exp(-0.5 * r * r)
    x[0] = v / f
    x[1] = r
    x[blocks] = 0.0
    for i in range(2, blocks):
        x[i] = math.sqrt(-2.0 * math.log(v / x[i - 1] + f))
        f = math.exp(-0.5 * x[i] * x[i])
    return x, x[1:] / x[:-1], r


_ZX, _ZR, _ZTAIL = _zig_tables()
_MASK7 = np.uint64(0x7F)


@nb.njit(inline="always", cache=True)
def normal(key, ctr):
    """Standard normal by the ziggurat method; returns ``(z, ctr)``.

    One 64-bit draw supplies both the layer (low 7 bits) and the
    abscissa (top 53 bits), which do not overlap.
    """
    while True:
        z = mix64(key + (ctr + _ONE) * _GAMMA)
        ctr = ctr + _ONE
        u = 2.0 * ((float(z >> _S11) + 0.5) * _TWO_M53) - 1.0
        i = int(z & _MASK7)
        if abs(u) < _ZR[i]:
            return u * _ZX[i], ctr
        if i == 0:
            while True:
                a, ctr = uniform(key, ctr)
                b, ctr = uniform(key, ctr)
                xt = math.log(a) / _ZTAIL
                if -2.0 * math.log(b) >= xt * xt:
                    return (xt - _ZTAIL if u < 0 else _ZTAIL - xt), ctr
        x = u * _ZX[i]
        f0 = math.exp(-0.5 * (_ZX[i] * _ZX[i] - x * x))
        f1 = math.exp(-0.5 * (_ZX[i + 1] * _ZX[i + 1] - x * x))
        w, ctr = uniform(key, ctr)
        if f1 + w * (f0 - f1) < 1.0:
            return x, ctr


@nb.njit(inline="always", cache=True)
def positive_stable(beta, key, ctr):
    """Standard positive ``beta``-stable variate, ``E exp(-λS) = exp(-λ^beta)``.

    Kanter's representation, evaluated in logs so small ``beta`` does
    not overflow the intermediate powers; ``beta = 1/2`` uses the exact
    inverse-square-normal form.
    """
    if beta == 0.5:
        # Lévy law: 1 / (2 Z^2) with Z standard normal
        z, ctr = normal(key, ctr)
        return 0.5 / (z * z), ctr
    u, ctr = uniform(key, ctr)
    v, ctr = uniform(key, ctr)
    th = math.pi * u
    e = -math.log(v)
    logs = (math.log(math.sin(beta * th)) - math.log(math.sin(th)) / beta
            + (1.0 - beta) / beta * (math.log(math.sin((1.0 - beta) * th)) - math.log(e)))
    return math.exp(logs), ctr


@nb.njit(cache=True)
def _subordinator_batch(beta, scale, seed, offset, n):
    out = np.empty(n)
    for i in range(n):
        key = stream_key(seed, offset + i)
        s, _ = positive_stable(beta, key, np.uint64(0))
        out[i] = scale * s
    return out


@nb.njit(cache=True)
def _stable_batch(beta, scale, d, seed, offset, n):
    out = np.empty((n, d))
    for i in range(n):
        key = stream_key(seed, offset + i)
        s, ctr = positive_stable(beta, key, np.uint64(0))
        r = scale * math.sqrt(2.0 * s)
        for c in range(d):
            g, ctr = normal(key, ctr)
            out[i, c] = r * g
    return out


def _seed(seed) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


def sample_subordinator_increment(alpha_half: float, dt: float, seed: int = 0, size: int | None = None,
                                  offset: int = 0):
    """Increment over ``dt`` of the standard ``alpha_half``-stable subordinator.

    Laplace exponent ``λ^{alpha_half}``; one independent stream per sample.
    """
    if not 0.0 < alpha_half < 1.0:
        raise ValueError("alpha_half must lie in (0, 1)")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = 1 if size is None else int(size)
    out = _subordinator_batch(float(alpha_half), dt ** (1.0 / alpha_half), _seed(seed), int(offset), n)
    return float(out[0]) if size is None else out


def sample_stable_increment(params, dt: float, seed: int = 0, size: int | None = None, offset: int = 0):
    """Increment over ``dt`` of the isotropic α-stable process with generator ``Δ^{α/2}``.

    Realised as ``√(2 S_dt) G``; the jump weight ``a`` is not applied.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = 1 if size is None else int(size)
    beta = params.alpha / 2.0
    out = _stable_batch(beta, dt ** (1.0 / params.alpha), params.d, _seed(seed), int(offset), n)
    return out[0] if size is None else out
