"""Experiment configuration, dispatch and result files.

A config is an INI file with optional sections ``[experiment]``,
``[model]``, ``[domain]``, ``[grids]``, ``[sim]``, ``[output]`` and
``[tolerances]``; arrays are comma lists.  CSV output is deterministic
for a fixed config (wall times and timestamps go to the JSON metadata
block only).
"""

from __future__ import annotations

import configparser
import csv
import datetime as _dt
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import suites
from .envelopes import dirichlet_envelope, h_envelope, q_form
from .errors import InputError
from .fitting import fit_constant
from .model import Ball, Box, HalfSpace, ModelParams, SinusoidalHalfSpaceLike
from .montecarlo import SimConfig, simulate_paths, survival_from_batch, write_records

SCHEMA_VERSION = 1
EXPERIMENTS = ("envelope", "verify-identities", "quadrature", "simulate", "sandwich", "report")
CSV_COLUMNS = ("schema_version", "experiment", "suite", "check", "observed", "bound", "metric", "pass", "detail")


@dataclass
class ExperimentConfig:
    experiment: str
    params: ModelParams | None = None
    domain: object = None
    grids: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    output_dir: Path = Path("results")
    tolerances: dict = field(default_factory=dict)
    write_paths: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        self.output_dir = Path(self.output_dir)
        if self.experiment == "envelope":
            for key in ("t", "x", "y"):
                if not self.grids.get(key):
                    raise InputError(f"experiment 'envelope' needs a non-empty grid '{key}'")
            if self.params is None:
                raise InputError("experiment 'envelope' needs a [model] section")
        if self.write_paths and (self.params is None or not self.grids.get("x")):
            raise InputError("writing paths needs a [model] section and an x grid")

    def echo(self) -> dict:
        p = self.params
        return {
            "experiment": self.experiment,
            "params": None if p is None else {"d": p.d, "alpha": p.alpha, "a": p.a},
            "domain": None if self.domain is None else repr(self.domain),
            "grids": {k: list(v) for k, v in sorted(self.grids.items())},
            "sim": dict(sorted(self.sim.items())),
            "tolerances": dict(sorted(self.tolerances.items())),
        }


@dataclass
class RunReport:
    experiment: str
    config: dict
    rows: list
    constants: dict
    wall_time: float
    seed: int | None
    suite_times: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for _, r in self.rows)


# ---------------------------------------------------------------------------
# config parsing


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _domain(sec, d: int):
    kind = sec.get("kind", "halfspace").strip().lower()
    if kind == "halfspace":
        return HalfSpace(sec.getfloat("b", 0.0))
    if kind in ("sinusoid", "sinusoidal"):
        return SinusoidalHalfSpaceLike(sec.getfloat("b1", 0.0), sec.getfloat("amplitude", 1.0),
                                       sec.getfloat("wavelength", 2 * math.pi))
    if kind in ("box", "interval"):
        return Box(_floats(sec["lo"]), _floats(sec["hi"]))
    if kind == "ball":
        center = _floats(sec.get("center", ",".join(["0"] * d)))
        return Ball(center, sec.getfloat("radius", 1.0))
    raise InputError(f"unknown domain kind {kind!r}")


def load_config(path, experiment: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Read an INI config; ``overrides`` (seed, n_paths, dt, out) win over file values."""
    cp = configparser.ConfigParser()
    if path is not None:
        if not Path(path).is_file():
            raise InputError(f"config file {path} not found")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise InputError(f"cannot parse {path}: {exc}") from exc
    name = experiment or cp.get("experiment", "name", fallback=None)
    if name is None:
        raise InputError("no experiment given")
    try:
        params = None
        if cp.has_section("model"):
            m = cp["model"]
            params = ModelParams(m.getint("d", 1), m.getfloat("alpha", 1.0), m.getfloat("a", 1.0))
        domain = _domain(cp["domain"], params.d if params else 1) if cp.has_section("domain") else None
        grids = {k: _floats(v) for k, v in cp["grids"].items()} if cp.has_section("grids") else {}
        sim = {}
        if cp.has_section("sim"):
            s = cp["sim"]
            for key, conv in (("dt", float), ("n_paths", int), ("horizon", float), ("seed", int)):
                if key in s:
                    sim[key] = conv(s[key])
            if "bridge_correction" in s:
                sim["bridge_correction"] = s.getboolean("bridge_correction")
        tol = {k: float(v) for k, v in cp["tolerances"].items()} if cp.has_section("tolerances") else {}
        out = cp.get("output", "dir", fallback="results")
        write_paths = cp.getboolean("output", "paths", fallback=False)
    except (ValueError, KeyError, configparser.Error) as exc:
        raise InputError(f"invalid config: {exc}") from exc
    overrides = overrides or {}
    for key in ("seed", "n_paths", "dt"):
        if overrides.get(key) is not None:
            sim[key] = overrides[key]
    if overrides.get("out") is not None:
        out = overrides["out"]
    if domain is None and params is not None:
        domain = HalfSpace(0.0)
    return ExperimentConfig(name, params, domain, grids, sim, Path(out), tol, write_paths)


# ---------------------------------------------------------------------------
# experiments


def _pick(cfg: ExperimentConfig, key: str, default):
    return cfg.sim.get(key, default)


def _point(params: ModelParams, v: float):
    p = np.zeros(params.d)
    p[-1] = v
    return p


def _envelope_rows(cfg: ExperimentConfig):
    res = suites.SuiteResult("envelope")
    p, dom = cfg.params, cfg.domain
    C = cfg.tolerances.get("gauss_constant", 1.0)
    for t in cfg.grids["t"]:
        for x in cfg.grids["x"]:
            for y in cfg.grids["y"]:
                xp, yp = _point(p, x), _point(p, y)
                env = dirichlet_envelope(p, dom, t, xp, yp)
                r = float(np.linalg.norm(xp - yp))
                tag = f"t={t}/x={x}/y={y}"
                res.add(f"envelope/lower/{tag}", env.lower, math.nan, math.nan, True)
                res.add(f"envelope/upper/{tag}", env.upper, math.nan, math.nan, True)
                res.add(f"envelope/h/{tag}", h_envelope(p, C, t, r), math.nan, math.nan, True)
                if p.a > 0:
                    res.add(f"envelope/q/{tag}", q_form(p, dom, t, xp, yp), math.nan, math.nan, True)
    return [res]


def _grid(cfg, key, default):
    v = cfg.grids.get(key)
    return tuple(int(x) for x in v) if (v and key == "d") else (tuple(v) if v else default)


def _dispatch(cfg: ExperimentConfig) -> list:
    seed = cfg.sim.get("seed")
    tol = cfg.tolerances
    kw_seed = {} if seed is None else {"seed": seed}
    if cfg.experiment == "envelope":
        return _envelope_rows(cfg)
    if cfg.experiment == "verify-identities":
        return [
            suites.suite_scaling(tol=tol.get("scaling", 1e-10), limit=None, **kw_seed),
            suites.suite_phi_sandwich(limit=None, **kw_seed),
            suites.suite_lambda(limit=None),
            suites.suite_stable_band(spread=tol.get("stable_band_spread", 50.0), limit=None, **kw_seed),
        ]
    if cfg.experiment == "quadrature":
        grid = dict(dims=_grid(cfg, "d", suites.GRID_D), alphas=_grid(cfg, "alpha", suites.GRID_ALPHA),
                    a_values=_grid(cfg, "a", suites.GRID_A))
        C = tol.get("band", 20.0)
        return [
            suites.suite_q_green(C=C, limit=None, **grid, **kw_seed),
            suites.suite_IJ(C=C, limit=None, **grid, **kw_seed),
            suites.suite_occupation(alphas=grid["alphas"], drift=tol.get("occupation_drift", 2.0), limit=None),
        ]
    if cfg.experiment == "simulate":
        out = [
            suites.suite_mc_oracles(n_paths=_pick(cfg, "n_paths", 100_000), dt=_pick(cfg, "dt", 1e-4),
                                    limit=None, **kw_seed),
            suites.suite_samplers(limit=None, **kw_seed),
        ]
        if cfg.write_paths:
            out.append(_spool_paths(cfg))
        return out
    if cfg.experiment == "sandwich":
        return [
            suites.suite_envelope_sandwich(
                n_paths=_pick(cfg, "n_paths", 100_000), dt=_pick(cfg, "dt", 1e-3),
                t_grid=_grid(cfg, "t", suites.SANDWICH_T), xy_grid=_grid(cfg, "x", suites.SANDWICH_XY),
                spread=tol.get("sandwich_spread", 100.0), limit=None, **kw_seed),
            suites.suite_harmonic(limit=None, **kw_seed),
        ]
    raise InputError(f"experiment {cfg.experiment!r} has no suite dispatch")


def _spool_paths(cfg: ExperimentConfig):
    res = suites.SuiteResult("paths")
    sim = SimConfig(_pick(cfg, "dt", 1e-3), _pick(cfg, "n_paths", 10_000), _pick(cfg, "horizon", 1.0),
                    _pick(cfg, "seed", 0), _pick(cfg, "bridge_correction", True))
    x = _point(cfg.params, cfg.grids["x"][0])
    batch = simulate_paths(cfg.params, cfg.domain, sim, x)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_records(cfg.output_dir / "paths.bin", batch)
    rep = survival_from_batch(batch, sim.horizon)
    res.add("paths/survival_at_horizon", rep.estimate, math.nan, rep.std_error, True, f"n={batch.n}")
    return res


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def write_outputs(report: RunReport, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{report.experiment}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for suite, r in report.rows:
            w.writerow([SCHEMA_VERSION, report.experiment, suite, r.name, _fmt(r.observed), _fmt(r.bound),
                        _fmt(r.metric), int(r.passed), r.detail])
    json_path = out_dir / f"{report.experiment}.json"
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": report.experiment,
        "passed": report.passed,
        "seed": report.seed,
        "config": report.config,
        "constants": report.constants,
        "rows": [dict(suite=s, name=r.name, observed=r.observed, bound=r.bound, metric=r.metric,
                      passed=r.passed, detail=r.detail) for s, r in report.rows],
        "metadata": {
            "wall_time_s": report.wall_time,
            "suite_times_s": report.suite_times,
            "finished_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        },
    }
    with open(json_path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=False)
        fh.write("\n")
    return csv_path, json_path


def _report(cfg: ExperimentConfig) -> RunReport:
    rows, constants = [], {}
    t0 = time.perf_counter()
    found = sorted(p for p in cfg.output_dir.glob("*.json") if p.stem in EXPERIMENTS and p.stem != "report")
    if not found:
        raise InputError(f"no experiment reports found in {cfg.output_dir}")
    for path in found:
        doc = json.loads(path.read_text())
        for r in doc["rows"]:
            if not r["passed"]:
                rows.append((path.stem, suites.CheckRow(r["name"], _num(r["observed"]), _num(r["bound"]),
                                                        _num(r["metric"]), False, r["detail"])))
        rows.append((path.stem, suites.CheckRow(f"report/{path.stem}", float(len(doc["rows"])), math.nan,
                                                math.nan, bool(doc["passed"]), "")))
        for k, v in doc["constants"].items():
            constants[f"{path.stem}:{k}"] = v
    return RunReport("report", cfg.echo(), rows, constants, time.perf_counter() - t0, None)


def _num(v) -> float:
    return float(v) if v is not None else math.nan


def run(config: ExperimentConfig) -> RunReport:
    """Execute one experiment and write ``<out>/<experiment>.csv`` and ``.json``."""
    t0 = time.perf_counter()
    if config.experiment == "report":
        report = _report(config)
    else:
        results = _dispatch(config)
        rows = [(s.name, r) for s in results for r in s.rows]
        constants = {k: v for s in results for k, v in s.constants.items()}
        report = RunReport(config.experiment, config.echo(), rows, constants, time.perf_counter() - t0,
                           config.sim.get("seed"), {s.name: s.elapsed for s in results})
    write_outputs(report, config.output_dir)
    return report


__all__ = ["ExperimentConfig", "RunReport", "run", "load_config", "fit_constant", "write_outputs",
           "EXPERIMENTS", "SCHEMA_VERSION"]
