import math

import numpy as np
import pytest
from scipy import special

from hkverify import Ball, Box, CensoringError, HalfSpace, InputError, Interval, ModelParams
from hkverify.montecarlo import (SimConfig, check_levy_system, density_from_batch, estimate_density,
                                 estimate_exit_distribution, estimate_mean_exit_time, estimate_survival,
                                 read_records, simulate_killed_path, simulate_paths, survival_from_batch,
                                 write_records)

BM = ModelParams(1, 1.0, 0.0)
H = HalfSpace(0.0)


def test_simconfig_validation():
    with pytest.raises(InputError):
        SimConfig(0.0, 10, 1.0)
    with pytest.raises(InputError):
        SimConfig(2.0, 10, 1.0)
    with pytest.raises(InputError):
        SimConfig(0.1, 0, 1.0)
    assert SimConfig(0.3, 1, 1.0).n_steps == 4
    assert SimConfig(0.1, 1, 1.0).n_steps == 10


def test_brownian_survival_oracle():
    cfg = SimConfig(1e-3, 40_000, 1.0, seed=3)
    rep = estimate_survival(BM, H, 1.0, np.array([1.0]), cfg)
    assert abs(rep.estimate - special.erf(0.5)) < 3 * rep.std_error + 1e-3


def test_bridge_correction_reduces_bias():
    cfg = SimConfig(1e-2, 40_000, 1.0, seed=1, bridge_correction=False)
    raw = estimate_survival(BM, H, 1.0, np.array([1.0]), cfg).estimate
    fixed = estimate_survival(BM, H, 1.0, np.array([1.0]), cfg.replace(bridge_correction=True)).estimate
    assert abs(fixed - special.erf(0.5)) < abs(raw - special.erf(0.5))


def test_mean_exit_time_oracle():
    rep = estimate_mean_exit_time(BM, Interval(0.0, 2.0), np.array([1.0]), SimConfig(1e-3, 20_000, 20.0, seed=2))
    assert abs(rep.estimate - 0.5) < 3 * rep.std_error + 2e-3


def test_density_mass_identity():
    cfg = SimConfig(1e-2, 20_000, 1.0, seed=4)
    p = ModelParams(1, 1.0, 1.0)
    hist = estimate_density(p, H, 1.0, np.array([1.0]), np.linspace(0.0, 4.0, 41), cfg)
    mass = float(np.sum(hist.estimates * hist.volumes))
    assert mass + hist.outside == pytest.approx(hist.survival, abs=1e-12)
    assert hist.empty.shape == (40,)


def test_density_needs_observed_time():
    batch = simulate_paths(BM, H, SimConfig(0.1, 10, 1.0), np.array([1.0]))
    with pytest.raises(InputError):
        density_from_batch(batch, 0.5, np.linspace(0, 1, 3))


def test_batch_splitting_is_bit_identical():
    p = ModelParams(2, 1.3, 1.0)
    cfg = SimConfig(1e-2, 300, 2.0, seed=12)
    x = np.array([0.0, 1.0])
    full = simulate_paths(p, H, cfg, x)
    a = simulate_paths(p, H, cfg, x, offset=0, n=120)
    b = simulate_paths(p, H, cfg, x, offset=120, n=180)
    assert np.array_equal(np.concatenate([a.exit_time, b.exit_time]), full.exit_time, equal_nan=True)
    one = simulate_killed_path(p, H, cfg, x, path_index=150)
    if one.alive:
        assert np.array_equal(one.final_position, full.final_pos[150])
    else:
        assert one.exit_time == full.exit_time[150]


def test_deep_start_survives():
    cfg = SimConfig(1e-2, 5_000, 1.0, seed=5)
    rep = estimate_survival(ModelParams(1, 1.0, 1.0), H, 1.0, np.array([1e3]), cfg)
    assert rep.estimate >= 0.999


def test_survival_monotone_in_time():
    batch = simulate_paths(ModelParams(1, 1.0, 1.0), H, SimConfig(1e-2, 10_000, 64.0, seed=6), np.array([4.0]))
    s = [survival_from_batch(batch, t).estimate for t in (1, 4, 16, 64)]
    assert all(a >= b for a, b in zip(s, s[1:]))


def test_symmetric_exit():
    rep = estimate_exit_distribution(ModelParams(1, 1.0, 1.0), Interval(-1.0, 1.0), np.array([0.0]),
                                     lambda pos: pos[:, 0] >= 1.0, SimConfig(1e-3, 20_000, 50.0, seed=7))
    assert abs(rep.estimate - 0.5) < 3 * rep.std_error


def test_exit_estimators_need_bounded_domain():
    with pytest.raises(InputError):
        estimate_mean_exit_time(BM, H, np.array([1.0]), SimConfig(0.1, 10, 1.0))


def test_censoring_is_reported():
    with pytest.raises(CensoringError):
        estimate_mean_exit_time(BM, Interval(0.0, 20.0), np.array([10.0]), SimConfig(1e-2, 1000, 1.0))


def test_ball_domain_exit_time():
    # E τ = (R² - |x|²) / (2d) for generator Δ
    rep = estimate_mean_exit_time(ModelParams(2, 1.0, 0.0), Ball((0.0, 0.0), 1.0), np.array([0.0, 0.0]),
                                  SimConfig(1e-3, 20_000, 10.0, seed=8))
    assert abs(rep.estimate - 0.25) < 3 * rep.std_error + 2e-3


def test_levy_system_small():
    lhs, rhs = check_levy_system(ModelParams(1, 1.0, 1.0), Interval(-1.0, 1.0), np.array([0.0]),
                                 Interval(2.0, 3.0), SimConfig(1e-3, 20_000, 50.0, seed=9))
    assert abs(lhs.estimate - rhs.estimate) < 3 * lhs.meta["joint_std_error"]


def test_levy_system_box_in_2d():
    lhs, rhs = check_levy_system(ModelParams(2, 1.0, 1.0), Box((-1.0, -1.0), (1.0, 1.0)), np.zeros(2),
                                 Box((2.0, -1.0), (3.0, 1.0)), SimConfig(1e-2, 10_000, 50.0, seed=10))
    assert abs(lhs.estimate - rhs.estimate) < 3 * lhs.meta["joint_std_error"]


def test_levy_target_must_be_disjoint():
    with pytest.raises(InputError):
        check_levy_system(ModelParams(1, 1.0, 1.0), Interval(-1.0, 1.0), np.array([0.0]), Interval(0.5, 3.0),
                          SimConfig(1e-2, 10, 1.0))


def test_records_round_trip(tmp_path):
    p = ModelParams(2, 1.0, 1.0)
    batch = simulate_paths(p, H, SimConfig(1e-2, 500, 1.0, seed=11), np.array([0.0, 0.5]))
    path = tmp_path / "paths.bin"
    write_records(path, batch, offset=7)
    assert path.stat().st_size == 500 * (8 + 1 + 8 + 16)
    rec = read_records(path, 2)
    assert np.array_equal(rec["index"], np.arange(7, 507))
    assert np.array_equal(rec["alive"].astype(bool), batch.alive)
    assert np.array_equal(rec["exit_time"], batch.exit_time, equal_nan=True)
    dead = ~batch.alive
    assert np.array_equal(rec["position"][dead], batch.exit_pos[dead])
    assert np.array_equal(rec["position"][~dead], batch.final_pos[~dead])


def test_start_point_checks():
    with pytest.raises(InputError):
        simulate_paths(BM, H, SimConfig(0.1, 10, 1.0), np.array([-1.0]))
    with pytest.raises(InputError):
        simulate_paths(BM, H, SimConfig(0.1, 10, 1.0), np.array([1.0, 1.0]))
