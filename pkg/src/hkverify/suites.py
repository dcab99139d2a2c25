"""Verification suites: each returns check rows plus fitted constants.

The harness experiments and the acceptance tests both run these.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .envelopes import dirichlet_envelope, green_f, green_g
from .fitting import fit_constant
from .identities import (check_prop12_band, lambda_constant, power_identity_sides, relative_error,
                         sweep_phi_sandwich, sweep_scaling)
from .model import HalfSpace, Interval, ModelParams, regime_thresholds
from .montecarlo import (SimConfig, check_levy_system, density_from_batch, exit_distribution_from_batch,
                         mean_exit_time_from_batch, simulate_paths, survival_from_batch)
from .quadrature import (J_bound_shape, check_prop21, closed_I, integrate_I, integrate_J,
                         integrate_q_over_time)
from .rng import sample_stable_increment, sample_subordinator_increment


@dataclass
class CheckRow:
    name: str
    observed: float
    bound: float
    metric: float
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    rows: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, name, observed, bound, metric, passed, detail=""):
        self.rows.append(CheckRow(name, float(observed), float(bound), float(metric), bool(passed), detail))


class _Timer:
    def __init__(self, res: SuiteResult, limit: float | None):
        self.res, self.limit = res, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.res

    def __exit__(self, *exc):
        self.res.elapsed = time.perf_counter() - self.t0
        if exc[0] is None and self.limit is not None:
            self.res.add(f"{self.res.name}/runtime_s", self.res.elapsed, self.limit,
                         self.res.elapsed / self.limit, self.res.elapsed < self.limit)
        return False


# ---------------------------------------------------------------------------
# identities


def suite_scaling(n: int = 10_000, seed: int = 0, tol: float = 1e-10, limit: float | None = 5.0) -> SuiteResult:
    with _Timer(SuiteResult("scaling"), limit) as res:
        for name, err in sweep_scaling(n, seed).items():
            res.add(f"scaling/{name}", err, tol, err / tol, err <= tol)
    return res


def suite_phi_sandwich(n: int = 1_000_000, seed: int = 0, limit: float | None = 10.0) -> SuiteResult:
    with _Timer(SuiteResult("phi_sandwich"), limit) as res:
        bad = sweep_phi_sandwich(n, seed)
        res.add("phi_sandwich/violations", bad, 0, bad, bad == 0, f"n={n}")
    return res


def suite_lambda(alphas=(0.5, 1.0, 1.5), n_grid: int = 20, limit: float | None = 60.0) -> SuiteResult:
    with _Timer(SuiteResult("lambda"), limit) as res:
        for al in alphas:
            z = lambda_constant(1, al, al / 2)
            res.add(f"lambda/zero_at_half/alpha={al}", abs(z), 1e-8, abs(z) / 1e-8, abs(z) <= 1e-8)
            ps = al * (2 * np.arange(n_grid) + 1) / (2 * n_grid)
            wrong = 0
            for p in ps:
                v = lambda_constant(1, al, float(p))
                want = -1 if p < al / 2 else 1
                wrong += int(np.sign(v) != want)
            res.add(f"lambda/sign_pattern/alpha={al}", wrong, 0, wrong, wrong == 0, f"{n_grid} p values")
        for p in (0.25, 0.75):
            for xd in (0.5, 1.0, 2.0):
                lhs, rhs = power_identity_sides(1.0, p, xd)
                err = relative_error(lhs, rhs)
                res.add(f"lambda/power_identity/p={p}/xd={xd}", err, 1e-3, err / 1e-3, err <= 1e-3,
                        f"pv={lhs!r} lambda_term={rhs!r}")
        res.constants["lambda(1,0.25)"] = lambda_constant(1, 1.0, 0.25)
        res.constants["lambda(1,0.75)"] = lambda_constant(1, 1.0, 0.75)
    return res


def suite_stable_band(alphas=(0.5, 1.0, 1.5), a_values=(1.0, 0.5), samples: int = 20_000, seed: int = 0,
                 c1: float = 1.0, spread: float = 50.0, limit: float | None = None) -> SuiteResult:
    with _Timer(SuiteResult("stable_band"), limit) as res:
        for al in alphas:
            for a in a_values:
                lo, hi = check_prop12_band(ModelParams(1, al, a), c1, samples, seed)
                ok = math.isfinite(hi) and lo > 0 and hi / lo <= spread
                res.add(f"stable_band/alpha={al}/a={a}", hi / lo, spread, hi / lo / spread, ok,
                        f"band=[{lo!r}, {hi!r}]")
                res.constants[f"stable_band_c2/alpha={al}/a={a}"] = max(hi, 1 / lo)
    return res


# ---------------------------------------------------------------------------
# quadrature


def halfspace_pairs(params: ModelParams, n: int, rng, restrict: bool = False, decades: float = 2.0):
    """Random point pairs in ``HalfSpace(0)``, log-uniform around ``r_star``."""
    _, r_star = regime_thresholds(params)
    d = params.d
    out = []
    while len(out) < n:
        x = np.zeros(d)
        y = np.zeros(d)
        x[-1] = r_star * 10 ** rng.uniform(-decades, decades)
        y[-1] = r_star * 10 ** rng.uniform(-decades, decades)
        if d > 1:
            v = rng.normal(size=d - 1)
            y[:-1] = v / np.linalg.norm(v) * r_star * 10 ** rng.uniform(-decades, decades)
        r = np.linalg.norm(x - y)
        if r == 0 or (restrict and r > r_star):
            continue
        out.append((x, y))
    return out


GRID_D, GRID_ALPHA, GRID_A = (1, 2, 3), (0.5, 1.0, 1.5), (0.25, 1.0, 4.0)


def suite_q_green(dims=GRID_D, alphas=GRID_ALPHA, a_values=GRID_A, n_pairs: int = 100, seed: int = 0,
                  C: float = 20.0, limit: float | None = 300.0) -> SuiteResult:
    with _Timer(SuiteResult("q_green"), limit) as res:
        rng = np.random.default_rng(seed)
        dom = HalfSpace(0.0)
        for d in dims:
            for al in alphas:
                for a in a_values:
                    p = ModelParams(d, al, a)
                    rows = []
                    for x, y in halfspace_pairs(p, n_pairs, rng):
                        q = integrate_q_over_time(p, dom, x, y)
                        rows.append((q.value, green_f(p, dom, x, y)))
                    c = fit_constant(rows, two_sided=True)
                    ratios = [o / s for o, s in rows]
                    res.add(f"q_green/d={d}/alpha={al}/a={a}", c, C, c / C, c <= C,
                            f"band=[{min(ratios)!r}, {max(ratios)!r}]")
                    res.constants[f"q_green/d={d}/alpha={al}/a={a}"] = c
    return res


def suite_IJ(dims=GRID_D, alphas=GRID_ALPHA, a_values=GRID_A, n_pairs: int = 100, seed: int = 1,
             c_exp: float = 1.0, C: float = 20.0, limit: float | None = 300.0) -> SuiteResult:
    with _Timer(SuiteResult("IJ"), limit) as res:
        rng = np.random.default_rng(seed)
        dom = HalfSpace(0.0)
        for d in dims:
            for al in alphas:
                j_rows = []
                for a in a_values:
                    p = ModelParams(d, al, a)
                    rows = []
                    for x, y in halfspace_pairs(p, n_pairs, rng, restrict=True):
                        dx, dy, r = dom.delta(x), dom.delta(y), float(np.linalg.norm(x - y))
                        I = integrate_I(p, dom, c_exp, x, y).value
                        J = integrate_J(p, dom, x, y).value
                        if d == 1:
                            rows.append((I + J, green_g(p, dom, x, y)))
                        else:
                            rows.append((I, closed_I(p, dx, dy, r)))
                            j_rows.append((J, float(J_bound_shape(dx, dy, r))))
                    c = fit_constant(rows, two_sided=True)
                    label = "IJ_sum_vs_g" if d == 1 else "I_vs_closed"
                    res.add(f"IJ/{label}/d={d}/alpha={al}/a={a}", c, C, c / C, c <= C)
                    res.constants[f"IJ/{label}/d={d}/alpha={al}/a={a}"] = c
                if d >= 2:
                    cj = fit_constant(j_rows)
                    res.add(f"IJ/J_bound/d={d}/alpha={al}", cj, math.inf, 0.0, math.isfinite(cj),
                            "single c across a")
                    res.constants[f"IJ/J_bound/d={d}/alpha={al}"] = cj
    return res


OCCUPATION_R = (0.1, 1.0, 10.0, 100.0)
OCCUPATION_X = (0.01, 0.1, 0.5, 0.9, 0.99)


def suite_occupation(alphas=GRID_ALPHA, r_grid=OCCUPATION_R, x_fracs=OCCUPATION_X, drift: float = 2.0,
                 limit: float | None = 60.0) -> SuiteResult:
    """Fitted ``c`` per α over the r×x grid, and its drift between the small-r and large-r halves."""
    with _Timer(SuiteResult("occupation"), limit) as res:
        half = len(r_grid) // 2
        for al in alphas:
            rows = {r: [check_prop21(al, r, f * r) for f in x_fracs] for r in r_grid}
            c_all = fit_constant([row for r in r_grid for row in rows[r]])
            c_lo = fit_constant([row for r in r_grid[:half] for row in rows[r]])
            c_hi = fit_constant([row for r in r_grid[half:] for row in rows[r]])
            ratio = max(c_lo, c_hi) / min(c_lo, c_hi)
            res.add(f"occupation/c/alpha={al}", c_all, math.inf, 0.0, math.isfinite(c_all))
            res.add(f"occupation/halves_drift/alpha={al}", ratio, drift, ratio / drift, ratio < drift,
                    f"c_small_r={c_lo!r} c_large_r={c_hi!r}")
            res.constants[f"occupation/alpha={al}"] = c_all
    return res


# ---------------------------------------------------------------------------
# Monte Carlo


def _sigma_row(res, name, rep, oracle, extra=0.0):
    dist = abs(rep.estimate - oracle)
    tol = 3.0 * rep.std_error + extra
    res.add(name, rep.estimate, oracle, dist / rep.std_error if rep.std_error > 0 else math.inf,
            dist <= tol, f"se={rep.std_error!r} allowance={extra!r}")


def suite_mc_oracles(n_paths: int = 100_000, dt: float = 1e-4, seed: int = 7, bin_half_width: float = 0.05,
                     limit: float | None = 120.0) -> SuiteResult:
    """Pure Brownian (a = 0) oracles in one dimension."""
    with _Timer(SuiteResult("mc_oracles"), limit) as res:
        p0 = ModelParams(1, 1.0, 0.0)
        h = HalfSpace(0.0)
        b1 = simulate_paths(p0, h, SimConfig(dt, n_paths, 1.0, seed), [1.0], observe=(1.0,))
        _sigma_row(res, "mc/survival/x=1/t=1", survival_from_batch(b1, 1.0), special.erf(1.0 / 2.0))
        b2 = simulate_paths(p0, h, SimConfig(dt, n_paths, 4.0, seed + 1), [2.0])
        _sigma_row(res, "mc/survival/x=2/t=4", survival_from_batch(b2, 4.0), special.erf(2.0 / (2.0 * 2.0)))
        b3 = simulate_paths(p0, Interval(0.0, 2.0), SimConfig(dt, n_paths, 20.0, seed + 2), [1.0])
        _sigma_row(res, "mc/mean_exit/(0,2)/x=1", mean_exit_time_from_batch(b3), 0.5)

        # image kernel at t = 1, x = y = 1; allowance is the exact bin-average bias
        def image(y, t=1.0, x=1.0):
            return (np.exp(-(x - y) ** 2 / (4 * t)) - np.exp(-(x + y) ** 2 / (4 * t))) / np.sqrt(4 * np.pi * t)

        def image_cdf(y, t=1.0, x=1.0):
            s = 2.0 * np.sqrt(t)
            return 0.5 * (special.erf((y - x) / s) - special.erf((y + x) / s))

        lo, hi = 1.0 - bin_half_width, 1.0 + bin_half_width
        hist = density_from_batch(b1, 1.0, np.array([lo, hi]))
        point = float(image(1.0))
        bias = abs((image_cdf(hi) - image_cdf(lo)) / (hi - lo) - point)
        _sigma_row(res, "mc/density/t=1/x=y=1", hist.reports[0], point, bias)
    return res


def suite_samplers(n: int = 100_000, seed: int = 11, tol: float = 0.01, limit: float | None = 30.0) -> SuiteResult:
    with _Timer(SuiteResult("samplers"), limit) as res:
        y = sample_stable_increment(ModelParams(1, 1.0, 1.0), 1.0, seed, n)[:, 0]
        ks = stats.kstest(y, stats.cauchy.cdf).statistic
        res.add("samplers/ks/cauchy_alpha=1", ks, tol, ks / tol, ks <= tol)
        s = sample_subordinator_increment(0.5, 1.0, seed + 1, n)
        ks = stats.kstest(s, lambda v: special.erfc(1.0 / (2.0 * np.sqrt(v)))).statistic
        res.add("samplers/ks/subordinator_half", ks, tol, ks / tol, ks <= tol)
    return res


SANDWICH_T = (0.5, 1.0, 2.0, 4.0)
SANDWICH_XY = (0.25, 0.5, 1.0, 2.0, 4.0)


def suite_envelope_sandwich(n_paths: int = 100_000, dt: float = 1e-3, seed: int = 21, t_grid=SANDWICH_T,
                            xy_grid=SANDWICH_XY, rel_bin: float = 0.1, spread: float = 100.0,
                            empty_frac: float = 0.05, limit: float | None = 900.0) -> SuiteResult:
    """Two-sided Dirichlet envelope fit to histogram densities (a = 1, α = 1, d = 1)."""
    with _Timer(SuiteResult("sandwich"), limit) as res:
        p = ModelParams(1, 1.0, 1.0)
        h = HalfSpace(0.0)
        rows, mids, cells, empty = [], [], 0, 0
        for k, x in enumerate(xy_grid):
            batch = simulate_paths(p, h, SimConfig(dt, n_paths, max(t_grid), seed + k), [x], observe=t_grid)
            for t in t_grid:
                for y in xy_grid:
                    cells += 1
                    hist = density_from_batch(batch, t, np.array([y * (1 - rel_bin), y * (1 + rel_bin)]))
                    est = hist.reports[0].estimate
                    if hist.empty[0]:
                        empty += 1
                        continue
                    env = dirichlet_envelope(p, h, t, [x], [y])
                    rows.append((est, env.lower, env.upper))
                    mids.append(est / env.midpoint)
        c = max(1.0, max(e / u for e, _, u in rows), max(lo / e for e, lo, _ in rows))
        res.constants["sandwich_c"] = c
        res.add("sandwich/fitted_c", c, math.inf, 0.0, math.isfinite(c))
        s = max(mids) / min(mids)
        res.add("sandwich/midpoint_spread", s, spread, s / spread, s <= spread)
        frac = empty / cells
        res.add("sandwich/empty_cells", frac, empty_frac, frac / empty_frac, frac <= empty_frac,
                f"{empty} of {cells}")
    return res


def suite_harmonic(n_paths: int = 20_000, seed: int = 31, R1: float = 3.0, limit: float | None = 600.0,
                   levy_paths: int = 100_000) -> SuiteResult:
    """Harmonic-measure upper bound, interval-exit lower bound and the Lévy system (d = 1, α = 1)."""
    with _Timer(SuiteResult("harmonic"), limit) as res:
        al = 1.0
        p = ModelParams(1, al, 1.0)

        rows = []
        for k, r in enumerate((4.0, 8.0, 16.0)):
            batch = simulate_paths(p, Interval(0.0, r), SimConfig(0.005, n_paths, 50.0 * r, seed + k), [r / 4])
            hit = exit_distribution_from_batch(batch, lambda z, r=r: np.abs(z[:, 0]) >= r)
            tau = mean_exit_time_from_batch(batch)
            shape = r ** (-al) * tau.estimate
            rows.append((hit.estimate, shape))
            res.add(f"harmonic/exit_beyond_r/r={r}", hit.estimate, shape, hit.estimate / shape, True,
                    f"se={hit.std_error!r} mean_exit={tau.estimate!r}")
        c = fit_constant(rows)
        res.constants["harmonic_c"] = c
        res.add("harmonic/fitted_c", c, math.inf, 0.0, math.isfinite(c))

        rows = []
        for k, (R, xd) in enumerate([(R, xd) for R in (64.0, 128.0) for xd in (8.0, 16.0, 32.0)]):
            if not 2 * R1 <= xd < R / 2:
                res.add(f"band_exit/R={R}/x={xd}", math.nan, math.nan, math.nan, True,
                        "skipped: start point outside the admissible region")
                continue
            batch = simulate_paths(p, Interval(R1, R / 2), SimConfig(0.02, n_paths, 40.0 * R, seed + 10 + k), [xd])
            hit = exit_distribution_from_batch(batch, lambda z, R=R: (z[:, 0] >= R / 2) & (z[:, 0] < R))
            shape = (xd / R) ** (al / 2)
            rows.append((hit.estimate, shape))
            res.add(f"band_exit/R={R}/x={xd}", hit.estimate, shape, hit.estimate / shape, hit.estimate > 0,
                    f"se={hit.std_error!r}")
        c_low = min(o / s for o, s in rows)
        res.constants["band_exit_c"] = c_low
        res.add("band_exit/fitted_c", c_low, 0.0, c_low, c_low > 0 and math.isfinite(c_low))

        for k, (a, target) in enumerate([(1.0, (2.0, 3.0)), (1.0, (100.0, 101.0)), (2.0, (2.0, 3.0))]):
            pa = ModelParams(1, al, a)
            lhs, rhs = check_levy_system(pa, Interval(-1.0, 1.0), [0.0], Interval(*target),
                                         SimConfig(1e-3, levy_paths, 50.0, seed + 20 + k))
            sig = lhs.meta["joint_std_error"]
            dist = abs(lhs.estimate - rhs.estimate)
            res.add(f"levy/a={a}/A={target}", lhs.estimate, rhs.estimate, dist / sig if sig > 0 else math.inf,
                    dist <= 3 * sig, f"joint_se={sig!r}")
    return res


SUITES = {
    "scaling": suite_scaling,
    "phi_sandwich": suite_phi_sandwich,
    "lambda": suite_lambda,
    "stable_band": suite_stable_band,
    "q_green": suite_q_green,
    "IJ": suite_IJ,
    "occupation": suite_occupation,
    "mc_oracles": suite_mc_oracles,
    "samplers": suite_samplers,
    "sandwich": suite_envelope_sandwich,
    "harmonic": suite_harmonic,
}
