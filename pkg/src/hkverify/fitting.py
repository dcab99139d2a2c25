"""Empirical comparability constants."""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError


def fit_constant(rows, two_sided: bool = False) -> float:
    """Smallest ``c >= 1`` with ``observed <= c * shape`` for every row.

    With ``two_sided`` the bound is ``1/c <= observed/shape <= c``; a zero
    observation then gives ``inf``.
    """
    rows = list(rows)
    if not rows:
        raise InputError("fit_constant needs at least one row")
    obs = np.array([float(o) for o, _ in rows])
    shape = np.array([float(s) for _, s in rows])
    if np.any(~(shape > 0)):
        raise InputError("every shape value must be positive")
    ratio = obs / shape
    if not two_sided:
        return float(max(1.0, ratio.max()))
    if np.any(ratio <= 0):
        return math.inf
    return float(max(1.0, ratio.max(), (1.0 / ratio).max()))


def band(ratios) -> tuple[float, float]:
    r = np.asarray(list(ratios), dtype=float)
    return float(r.min()), float(r.max())
