"""AWGN channel scaling, reproducibility, and Gaussianity checks."""

import numpy as np
import pytest

from cmshape import channel as ch


def test_sigma_from_snr_values():
    assert ch.sigma_from_snr(0.0) == pytest.approx(0.5)
    assert ch.sigma_from_snr(10.0) == pytest.approx(0.05)
    assert ch.sigma_from_snr(3.0, es=2.0) == pytest.approx(2.0 / (2 * 10**0.3))


def test_sigma_guards():
    with pytest.raises(ValueError):
        ch.sigma_from_snr(-150.0)
    with pytest.raises(ValueError):
        ch.sigma_from_snr(10.0, es=0.0)


def test_noise_statistics_fixed_seed():
    spec = ch.ChannelSpec(snr_db=7.0)
    rng = ch.worker_rng(42, 0)
    x = np.zeros(1_000_000)
    y = ch.add_noise(spec, x, rng)
    var = y.var()
    assert abs(var - spec.sigma2) / spec.sigma2 < 0.01
    kurt = (y**4).mean() / var**2
    assert 2.9 < kurt < 3.1


def test_noise_reproducible_and_additive():
    spec = ch.ChannelSpec(snr_db=12.0)
    y1 = ch.add_noise(spec, np.ones(1000), ch.worker_rng(7, 3))
    y2 = ch.add_noise(spec, np.ones(1000), ch.worker_rng(7, 3))
    assert (y1 == y2).all()
    y3 = ch.add_noise(spec, np.ones(1000), ch.worker_rng(7, 4))
    assert not (y1 == y3).all()


def test_zero_noise_limit():
    spec = ch.ChannelSpec(snr_db=99.0)
    x = np.linspace(-1, 1, 100)
    y = ch.add_noise(spec, x, ch.worker_rng(1, 1))
    assert np.allclose(y, x, atol=1e-4)
