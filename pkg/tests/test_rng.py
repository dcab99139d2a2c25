import math

import numpy as np
import pytest
from scipy import special, stats

from hkverify import ModelParams
from hkverify.rng import sample_stable_increment, sample_subordinator_increment


def _levy_cdf(s):
    # E exp(-λS) = exp(-√λ): density (2√π)^{-1} s^{-3/2} e^{-1/(4s)}
    return special.erfc(1.0 / (2.0 * np.sqrt(s)))


def test_subordinator_ks():
    s = sample_subordinator_increment(0.5, 1.0, seed=5, size=100_000)
    assert stats.kstest(s, _levy_cdf).statistic <= 0.01


def test_subordinator_general_beta_laplace():
    # E exp(-S) = e^{-1} for every beta
    for beta in (0.2, 0.35, 0.75, 0.9):
        s = sample_subordinator_increment(beta, 1.0, seed=1, size=200_000)
        est = np.mean(np.exp(-s))
        se = np.std(np.exp(-s)) / math.sqrt(len(s))
        assert abs(est - math.exp(-1)) < 4 * se


def test_subordinator_self_similarity():
    q = [0.1, 0.25, 0.5, 0.75, 0.9]
    s1 = np.quantile(sample_subordinator_increment(0.3, 1.0, seed=2, size=100_000), q)
    s2 = np.quantile(sample_subordinator_increment(0.3, 0.01, seed=2, size=100_000), q)
    np.testing.assert_allclose(s2 / s1, 0.01 ** (1 / 0.3), rtol=1e-12)


def test_subordinator_sane():
    s = sample_subordinator_increment(0.1, 1.0, seed=3, size=100_000)
    assert np.all(np.isfinite(s)) and np.all(s > 0)
    assert 0 < np.median(s) < math.inf


def test_cauchy_ks():
    x = sample_stable_increment(ModelParams(1, 1.0, 1.0), 0.3, seed=8, size=100_000)[:, 0]
    assert stats.kstest(x, stats.cauchy(scale=0.3).cdf).statistic <= 0.01


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_stable_against_scipy_levy_stable(alpha):
    # isotropic d = 1 with exponent |ξ|^α is scipy's S1 with scale 1
    x = sample_stable_increment(ModelParams(1, alpha, 1.0), 1.0, seed=4, size=50_000)[:, 0]
    q = np.array([0.6, 0.75, 0.9])
    ref = stats.levy_stable(alpha, 0.0).ppf(q)
    np.testing.assert_allclose(np.quantile(x, q), ref, rtol=0.05)


def test_stable_symmetry_and_scaling():
    p = ModelParams(2, 1.3, 1.0)
    x = sample_stable_increment(p, 1.0, seed=6, size=100_000)
    assert abs(np.mean(np.sign(x))) < 0.01
    y = sample_stable_increment(p, 0.05, seed=6, size=100_000)
    np.testing.assert_allclose(y, x * 0.05 ** (1 / 1.3), rtol=1e-12)


def test_streams_reproducible_under_splitting():
    full = sample_subordinator_increment(0.4, 1.0, seed=9, size=1000)
    parts = np.concatenate([sample_subordinator_increment(0.4, 1.0, seed=9, size=300),
                            sample_subordinator_increment(0.4, 1.0, seed=9, size=700, offset=300)])
    assert np.array_equal(full, parts)
    assert not np.array_equal(full, sample_subordinator_increment(0.4, 1.0, seed=10, size=1000))


def test_sampler_argument_checks():
    with pytest.raises(ValueError):
        sample_subordinator_increment(1.0, 1.0)
    with pytest.raises(ValueError):
        sample_stable_increment(ModelParams(1, 1.0, 1.0), 0.0)
