"""Monte Carlo simulation of the killed process ``X^a = X^0 + a Y``.

``X^0`` is Brownian motion with generator ``Δ`` (covariance ``2tI``) and
``Y`` an independent isotropic α-stable process.  Each Euler step moves
the Brownian part, tests for a diffusive exit (end point outside, or a
sampled bridge crossing), then applies the stable increment as a single
jump at the step end.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .envelopes import stable_constant
from .errors import CensoringError, InputError
from .model import Ball, Box, Domain, HalfSpace, ModelParams, SinusoidalHalfSpaceLike
from .rng import normal, positive_stable, stream_key, uniform

# Brownian part has generator Δ: increments over dt have variance 2 dt per coordinate
BROWNIAN_VARIANCE = 2.0

DIFFUSIVE, JUMP = 1, 2
_HALF, _SINE, _BOX, _BALL = 0, 1, 2, 3
CENSORING_LIMIT = 1e-3
# bridge crossing probabilities below exp(-_BRIDGE_CUT) are not sampled
_BRIDGE_CUT = 50.0


@dataclass(frozen=True)
class SimConfig:
    dt: float
    n_paths: int
    horizon: float
    seed: int = 0
    bridge_correction: bool = True

    def __post_init__(self):
        if not self.dt > 0 or not self.horizon > 0:
            raise InputError("dt and horizon must be positive")
        if self.dt > self.horizon:
            raise InputError("dt must not exceed the horizon")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InputError("n_paths must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.horizon / self.dt - 1e-9))

    def replace(self, **kw) -> "SimConfig":
        vals = dict(dt=self.dt, n_paths=self.n_paths, horizon=self.horizon, seed=self.seed,
                    bridge_correction=self.bridge_correction)
        vals.update(kw)
        return SimConfig(**vals)


@dataclass(frozen=True)
class KilledPathResult:
    alive: bool
    exit_time: float | None
    exit_position: np.ndarray | None
    final_position: np.ndarray | None


@dataclass(frozen=True)
class EstimatorReport:
    estimate: float
    std_error: float
    n: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.std_error >= 0 or self.n <= 0:
            raise ValueError("EstimatorReport needs std_error >= 0 and n > 0")


@dataclass(frozen=True)
class PathBatch:
    """Per-path outcomes of one simulation run.

    ``exit_time`` is NaN for paths alive at the horizon; ``obs_pos[i, j]``
    is the position at ``obs_times[j]`` or NaN if the path was already
    killed.
    """

    exit_time: np.ndarray
    exit_pos: np.ndarray
    exit_kind: np.ndarray
    final_pos: np.ndarray
    obs_times: np.ndarray
    obs_pos: np.ndarray
    levy_rhs: np.ndarray
    config: SimConfig

    @property
    def alive(self) -> np.ndarray:
        return np.isnan(self.exit_time)

    @property
    def n(self) -> int:
        return len(self.exit_time)


# ---------------------------------------------------------------------------
# numba kernel


@nb.njit(inline="always", cache=True)
def _sine_height(g, s):
    return g[0] + 0.5 * g[1] * (1.0 + math.sin(2.0 * math.pi * s / g[2]))


@nb.njit(inline="always", cache=True)
def _inside(kind, g, x, d):
    if kind == _HALF:
        return x[d - 1] > g[0]
    if kind == _SINE:
        return x[d - 1] > _sine_height(g, x[0])
    if kind == _BOX:
        for c in range(d):
            if not (g[c] < x[c] < g[d + c]):
                return False
        return True
    r2 = 0.0
    for c in range(d):
        r2 += (x[c] - g[c]) ** 2
    return r2 < g[d] * g[d]


@nb.njit(inline="always", cache=True)
def _project(kind, g, y, d):
    # boundary point associated with an outside (or bridge-exiting) end point
    if kind == _HALF:
        y[d - 1] = g[0]
    elif kind == _SINE:
        y[d - 1] = _sine_height(g, y[0])
    elif kind == _BOX:
        for c in range(d):
            y[c] = min(max(y[c], g[c]), g[d + c])
    else:
        r = 0.0
        for c in range(d):
            r += (y[c] - g[c]) ** 2
        r = math.sqrt(r)
        if r > 0:
            for c in range(d):
                y[c] = g[c] + g[d] * (y[c] - g[c]) / r


@nb.njit(inline="always", cache=True)
def _gap(kind, g, x, d):
    # lower bound for the distance to every flat boundary piece used by the bridge test
    if kind == _HALF or kind == _SINE:
        return x[d - 1] - g[0]
    if kind == _BOX:
        m = math.inf
        for c in range(d):
            m = min(m, x[c] - g[c], g[d + c] - x[c])
        return m
    r2 = 0.0
    for c in range(d):
        r2 += (x[c] - g[c]) ** 2
    return g[d] - math.sqrt(r2)


@nb.njit(cache=True)
def _bridge_exit(kind, g, x, y, d, dt, key, ctr):
    """Sample a within-step crossing of the Brownian bridge from x to y (both inside).

    Crossing probability of a flat boundary at gaps u, v is ``exp(-uv/dt)``
    for generator Δ.  Returns ``(exited, ctr)``; on exit ``y`` is moved to
    the boundary.
    """
    if kind == _HALF or kind == _SINE:
        b = g[0]
        e = (x[d - 1] - b) * (y[d - 1] - b) / dt
        if e < _BRIDGE_CUT:
            u, ctr = uniform(key, ctr)
            if u < math.exp(-e):
                y[d - 1] = b if kind == _HALF else _sine_height(g, y[0])
                return True, ctr
        return False, ctr
    if kind == _BOX:
        for c in range(d):
            for side in range(2):
                b = g[c + side * d]
                if not math.isfinite(b):
                    continue
                e = (x[c] - b) * (y[c] - b) / dt
                if e < _BRIDGE_CUT:
                    u, ctr = uniform(key, ctr)
                    if u < math.exp(-e):
                        y[c] = b
                        return True, ctr
        return False, ctr
    rx, ry = 0.0, 0.0
    for c in range(d):
        rx += (x[c] - g[c]) ** 2
        ry += (y[c] - g[c]) ** 2
    e = (g[d] - math.sqrt(rx)) * (g[d] - math.sqrt(ry)) / dt
    if e < _BRIDGE_CUT:
        u, ctr = uniform(key, ctr)
        if u < math.exp(-e):
            _project(kind, g, y, d)
            return True, ctr
    return False, ctr


@nb.njit(inline="always", cache=True)
def _levy_density(mode, lg, lw, lc, x, d, alpha):
    if mode == 1:
        lo, hi, z = lg[0], lg[1], x[0]
        if z < lo:
            return lc * ((lo - z) ** (-alpha) - (hi - z) ** (-alpha))
        if z > hi:
            return lc * ((z - hi) ** (-alpha) - (z - lo) ** (-alpha))
        return math.inf
    s = 0.0
    for m in range(lw.shape[0]):
        r2 = 0.0
        for c in range(d):
            r2 += (x[c] - lg[m * d + c]) ** 2
        s += lw[m] * r2 ** (-0.5 * (d + alpha))
    return lc * s


@nb.njit(cache=True)
def _one_path(i, x0, kind, g, d, a, alpha, dt, n_steps, obs_idx, seed, bridge,
              levy_mode, lg, lw, lc, exit_time, exit_pos, exit_kind, final_pos, obs_pos, levy_rhs):
    key = stream_key(seed, i)
    ctr = np.uint64(0)
    x = x0.copy()
    y = np.empty(d)
    sb = math.sqrt(2.0 * dt)
    jump_scale = a * dt ** (1.0 / alpha)
    beta = 0.5 * alpha
    j, n_obs = 0, obs_idx.shape[0]
    acc = 0.0
    dead = False
    for k in range(n_steps):
        while j < n_obs and obs_idx[j] == k:
            obs_pos[j, :] = x
            j += 1
        if levy_mode > 0:
            acc += dt * _levy_density(levy_mode, lg, lw, lc, x, d, alpha)
        for c in range(d):
            z, ctr = normal(key, ctr)
            y[c] = x[c] + sb * z
        if not _inside(kind, g, y, d):
            u, ctr = uniform(key, ctr)
            _project(kind, g, y, d)
            exit_time[0] = (k + u) * dt
            exit_kind[0] = DIFFUSIVE
            dead = True
            break
        if bridge and _gap(kind, g, x, d) * _gap(kind, g, y, d) < _BRIDGE_CUT * dt:
            hit, ctr = _bridge_exit(kind, g, x, y, d, dt, key, ctr)
            if hit:
                u, ctr = uniform(key, ctr)
                exit_time[0] = (k + u) * dt
                exit_kind[0] = DIFFUSIVE
                dead = True
                break
        if a > 0.0:
            s, ctr = positive_stable(beta, key, ctr)
            r = jump_scale * math.sqrt(2.0 * s)
            for c in range(d):
                z, ctr = normal(key, ctr)
                y[c] += r * z
            if not _inside(kind, g, y, d):
                exit_time[0] = (k + 1) * dt
                exit_kind[0] = JUMP
                dead = True
                break
        x[:] = y
    if dead:
        exit_pos[:] = y
    else:
        while j < n_obs and obs_idx[j] == n_steps:
            obs_pos[j, :] = x
            j += 1
        final_pos[:] = x
    levy_rhs[0] = acc


@nb.njit(parallel=True, cache=True)
def _simulate(x0, kind, g, d, a, alpha, dt, n_steps, obs_idx, seed, offset, n, bridge,
              levy_mode, lg, lw, lc):
    n_obs = obs_idx.shape[0]
    exit_time = np.full(n, np.nan)
    exit_pos = np.full((n, d), np.nan)
    exit_kind = np.zeros(n, dtype=np.uint8)
    final_pos = np.full((n, d), np.nan)
    obs_pos = np.full((n, n_obs, d), np.nan)
    levy_rhs = np.zeros(n)
    for p in nb.prange(n):
        _one_path(offset + p, x0, kind, g, d, a, alpha, dt, n_steps, obs_idx, seed, bridge,
                  levy_mode, lg, lw, lc, exit_time[p:p + 1], exit_pos[p], exit_kind[p:p + 1],
                  final_pos[p], obs_pos[p], levy_rhs[p:p + 1])
    return exit_time, exit_pos, exit_kind, final_pos, obs_pos, levy_rhs


# ---------------------------------------------------------------------------
# python drivers


if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old for numba and only produces a warning
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def _workers() -> None:
    cap = os.environ.get("HK_WORKERS")
    if cap:
        nb.set_num_threads(max(1, min(int(cap), nb.config.NUMBA_NUM_THREADS)))


def _encode_domain(domain: Domain, d: int):
    if isinstance(domain, HalfSpace):
        return _HALF, np.array([domain.b], dtype=float)
    if isinstance(domain, SinusoidalHalfSpaceLike):
        if d < 2:
            raise InputError("the sinusoidal domain needs d >= 2")
        return _SINE, np.array([domain.b1, domain.amplitude, domain.wavelength], dtype=float)
    if isinstance(domain, Box):
        if domain.d != d:
            raise InputError("box dimension does not match params.d")
        return _BOX, np.array(domain.lo + domain.hi, dtype=float)
    if isinstance(domain, Ball):
        if domain.d != d:
            raise InputError("ball dimension does not match params.d")
        return _BALL, np.array(domain.center + (domain.radius,), dtype=float)
    raise InputError(f"unsupported domain {domain!r}")


def _levy_setup(params: ModelParams, target, nodes_per_side: int = 24):
    if target is None:
        return 0, np.zeros(2), np.zeros(0), 0.0
    if not isinstance(target, Box) or not target.bounded or target.d != params.d:
        raise InputError("Lévy-system target must be a bounded box of dimension d")
    if params.a <= 0:
        raise InputError("the Lévy-system check needs a > 0")
    kappa = params.a ** params.alpha * stable_constant(params.d, params.alpha)
    if params.d == 1:
        return 1, np.array([target.lo[0], target.hi[0]]), np.zeros(0), kappa / params.alpha
    # tensor Gauss-Legendre rule over the box
    t, w = np.polynomial.legendre.leggauss(nodes_per_side)
    axes, wts = [], []
    for lo, hi in zip(target.lo, target.hi):
        axes.append(lo + (hi - lo) * (t + 1) / 2)
        wts.append(w * (hi - lo) / 2)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, params.d)
    weight = np.prod(np.stack(np.meshgrid(*wts, indexing="ij"), axis=-1).reshape(-1, params.d), axis=1)
    return 2, grid.ravel().copy(), weight, kappa


def simulate_paths(params: ModelParams, domain: Domain, config: SimConfig, x, observe=(),
                   levy_target: Box | None = None, offset: int = 0, n: int | None = None) -> PathBatch:
    """Simulate paths ``offset .. offset+n-1`` of the batch defined by ``config.seed``.

    ``observe`` lists times at which the alive positions are recorded;
    each is rounded to the step grid.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (params.d,):
        raise InputError(f"start point must have {params.d} coordinates")
    if not domain.contains(x):
        raise InputError("start point must lie inside the domain")
    kind, g = _encode_domain(domain, params.d)
    obs = np.asarray(sorted(observe), dtype=float)
    if np.any(obs < 0) or np.any(obs > config.horizon * (1 + 1e-12)):
        raise InputError("observation times must lie in [0, horizon]")
    obs_idx = np.rint(obs / config.dt).astype(np.int64)
    mode, lg, lw, lc = _levy_setup(params, levy_target)
    _workers()
    n = config.n_paths if n is None else int(n)
    out = _simulate(x, kind, g, params.d, params.a, params.alpha, config.dt, config.n_steps, obs_idx,
                    np.uint64(int(config.seed) & 0xFFFFFFFFFFFFFFFF), int(offset), n,
                    bool(config.bridge_correction), mode, lg, lw, lc)
    return PathBatch(
        exit_time=out[0], exit_pos=out[1], exit_kind=out[2], final_pos=out[3],
        obs_times=obs_idx * config.dt, obs_pos=out[4], levy_rhs=out[5], config=config)


def simulate_killed_path(params: ModelParams, domain: Domain, config: SimConfig, x,
                         path_index: int = 0) -> KilledPathResult:
    """Path ``path_index`` of the batch keyed by ``config.seed``."""
    b = simulate_paths(params, domain, config, x, offset=path_index, n=1)
    if b.alive[0]:
        return KilledPathResult(True, None, None, b.final_pos[0].copy())
    return KilledPathResult(False, float(b.exit_time[0]), b.exit_pos[0].copy(), None)


# ---------------------------------------------------------------------------
# estimators


def _binomial(k: int, n: int, meta=None) -> EstimatorReport:
    p = k / n
    return EstimatorReport(p, math.sqrt(max(p * (1 - p), 0.0) / n), n, dict(meta or {}))


def survival_from_batch(batch: PathBatch, t: float) -> EstimatorReport:
    alive = np.isnan(batch.exit_time) | (batch.exit_time > t)
    return _binomial(int(np.count_nonzero(alive)), batch.n, {"t": t})


def estimate_survival(params: ModelParams, domain: Domain, t: float, x, config: SimConfig) -> EstimatorReport:
    """Fraction of paths still alive at time ``t``."""
    if t > config.horizon * (1 + 1e-12):
        raise InputError("t exceeds the configured horizon")
    batch = simulate_paths(params, domain, config.replace(horizon=t, dt=min(config.dt, t)), x)
    rep = survival_from_batch(batch, t)
    rep.meta.update(dt=config.dt, seed=config.seed)
    return rep


@dataclass(frozen=True)
class DensityHistogram:
    """Per-bin density estimates; ``edges`` is one edge array per axis."""

    edges: tuple
    reports: list
    empty: np.ndarray
    outside: float
    survival: float
    t: float

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.estimate for r in self.reports]).reshape(self.empty.shape)

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([r.std_error for r in self.reports]).reshape(self.empty.shape)

    @property
    def volumes(self) -> np.ndarray:
        widths = [np.diff(e) for e in self.edges]
        return np.prod(np.stack(np.meshgrid(*widths, indexing="ij")), axis=0)


def density_from_batch(batch: PathBatch, t: float, bins) -> DensityHistogram:
    j = int(np.argmin(np.abs(batch.obs_times - t))) if len(batch.obs_times) else -1
    if j < 0 or abs(batch.obs_times[j] - t) > 1e-9 * max(t, 1.0):
        raise InputError(f"time {t} was not observed in this batch")
    pos = batch.obs_pos[:, j, :]
    alive = ~np.isnan(pos[:, 0])
    d = pos.shape[1]
    edges = tuple(np.asarray(e, dtype=float) for e in (bins if d > 1 else (bins,)))
    if len(edges) != d:
        raise InputError("need one edge array per coordinate")
    counts, _ = np.histogramdd(pos[alive], bins=edges)
    n = batch.n
    widths = [np.diff(e) for e in edges]
    vol = np.prod(np.stack(np.meshgrid(*widths, indexing="ij")), axis=0)
    p = counts / n
    reports = [EstimatorReport(float(pi / v), float(math.sqrt(pi * (1 - pi) / n) / v), n,
                               {"count": int(c)})
               for pi, v, c in zip(p.ravel(), vol.ravel(), counts.ravel())]
    survival = np.count_nonzero(alive) / n
    return DensityHistogram(edges, reports, counts == 0, float(survival - p.sum()), float(survival), t)


def estimate_density(params: ModelParams, domain: Domain, t: float, x, bins, config: SimConfig) -> DensityHistogram:
    """Histogram estimate of ``p_D(t, x, ·)``; ``bins`` is an edge array (d=1) or one per axis."""
    if params.d > 2:
        raise InputError("density histograms are limited to d <= 2")
    batch = simulate_paths(params, domain, config.replace(horizon=t, dt=min(config.dt, t)), x, observe=(t,))
    return density_from_batch(batch, t, bins)


def _require_bounded(domain: Domain):
    if isinstance(domain, Box) and domain.bounded or isinstance(domain, Ball):
        return
    raise InputError("exit estimators need a bounded domain (box, interval or ball)")


def _censoring(batch: PathBatch) -> int:
    k = int(np.count_nonzero(batch.alive))
    if k > CENSORING_LIMIT * batch.n:
        raise CensoringError(f"{k} of {batch.n} paths still alive at horizon {batch.config.horizon}; "
                             "raise the horizon")
    return k


def exit_distribution_from_batch(batch: PathBatch, target) -> EstimatorReport:
    censored = _censoring(batch)
    dead = ~batch.alive
    hit = np.zeros(batch.n, dtype=bool)
    hit[dead] = np.asarray(target(batch.exit_pos[dead]), dtype=bool)
    return _binomial(int(np.count_nonzero(hit)), batch.n, {"censored": censored})


def estimate_exit_distribution(params: ModelParams, domain_U: Domain, x, target, config: SimConfig) -> EstimatorReport:
    """Probability that the exit position satisfies ``target`` (vectorised predicate on (n, d))."""
    _require_bounded(domain_U)
    return exit_distribution_from_batch(simulate_paths(params, domain_U, config, x), target)


def mean_exit_time_from_batch(batch: PathBatch) -> EstimatorReport:
    censored = _censoring(batch)
    tau = batch.exit_time[~batch.alive]
    return EstimatorReport(float(np.mean(tau)), float(np.std(tau, ddof=1) / math.sqrt(len(tau))),
                           len(tau), {"censored": censored})


def estimate_mean_exit_time(params: ModelParams, domain_U: Domain, x, config: SimConfig) -> EstimatorReport:
    _require_bounded(domain_U)
    return mean_exit_time_from_batch(simulate_paths(params, domain_U, config, x))


def _disjoint(a: Domain, b: Box) -> bool:
    if isinstance(a, Box):
        return any(bh <= al or ah <= bl for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))
    c = np.array(a.center)
    nearest = np.clip(c, b.lo, b.hi)
    return float(np.linalg.norm(nearest - c)) >= a.radius


def check_levy_system(params: ModelParams, domain_U: Domain, x, target_A: Box, config: SimConfig):
    """Both sides of the Lévy-system identity with ``T = τ_U``.

    ``lhs`` counts paths whose exit jump lands in ``A``; ``rhs`` is the
    left-point time integral of ``∫_A J^a(X_s, y) dy`` along each path.
    Both reports carry ``diff_std_error`` (paired per-path difference)
    and ``joint_std_error``, which combines the rhs error with the
    binomial error of the lhs at the pooled mean.
    """
    _require_bounded(domain_U)
    if not _disjoint(domain_U, target_A):
        raise InputError("target A must be disjoint from U")
    batch = simulate_paths(params, domain_U, config, x, levy_target=target_A)
    censored = _censoring(batch)
    dead = ~batch.alive
    into = np.zeros(batch.n)
    pos = batch.exit_pos[dead]
    inA = np.all((pos > np.array(target_A.lo)) & (pos < np.array(target_A.hi)), axis=1)
    into[dead] = (inA & (batch.exit_kind[dead] == JUMP)).astype(float)
    diff = into - batch.levy_rhs
    n = batch.n
    # binomial variance at the pooled mean keeps the joint error honest when no jump lands in A
    m = min(max(float(np.mean(into)), float(np.mean(batch.levy_rhs))), 1.0)
    se_rhs = float(np.std(batch.levy_rhs, ddof=1) / math.sqrt(n))
    meta = {"censored": censored, "diff_std_error": float(np.std(diff, ddof=1) / math.sqrt(n)),
            "diff_mean": float(np.mean(diff)),
            "joint_std_error": math.sqrt(m * (1.0 - m) / n + se_rhs ** 2)}
    lhs = EstimatorReport(float(np.mean(into)), float(np.std(into, ddof=1) / math.sqrt(n)), n, dict(meta))
    rhs = EstimatorReport(float(np.mean(batch.levy_rhs)),
                          float(np.std(batch.levy_rhs, ddof=1) / math.sqrt(n)), n, dict(meta))
    return lhs, rhs


# ---------------------------------------------------------------------------
# binary path records


def record_dtype(d: int) -> np.dtype:
    return np.dtype([("index", "<u8"), ("alive", "u1"), ("exit_time", "<f8"), ("position", "<f8", (d,))])


def write_records(path, batch: PathBatch, offset: int = 0) -> None:
    """Fixed-width little-endian records: index, alive flag, exit time, exit or final position."""
    d = batch.exit_pos.shape[1]
    rec = np.empty(batch.n, dtype=record_dtype(d))
    rec["index"] = np.arange(offset, offset + batch.n, dtype=np.uint64)
    alive = batch.alive
    rec["alive"] = alive
    rec["exit_time"] = batch.exit_time
    rec["position"] = np.where(alive[:, None], batch.final_pos, batch.exit_pos)
    with open(path, "wb") as fh:
        rec.tofile(fh)


def read_records(path, d: int) -> np.ndarray:
    return np.fromfile(path, dtype=record_dtype(d))
