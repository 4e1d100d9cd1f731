"""PAM labeling, soft metrics, and the Gray-QAM baseline demapper."""

import math

import numpy as np
import pytest

from cmshape import mapping as mp


def test_pam_map_labeling():
    c = mp.make_pam(3)
    assert mp.pam_map(c, 0, [0, 0]) / c.norm == pytest.approx(1.0)
    assert mp.pam_map(c, 0, [0, 1]) / c.norm == pytest.approx(3.0)
    assert mp.pam_map(c, 1, [1, 1]) / c.norm == pytest.approx(-7.0)
    # toggling only the sign bit negates the output for all labels
    for v in range(4):
        bits = [(v >> 1) & 1, v & 1]
        assert mp.pam_map(c, 0, bits) == -mp.pam_map(c, 1, bits)


def test_factorization_and_normalization():
    for m in (2, 3, 4):
        c = mp.make_pam(m)
        levels = set(np.round(c.levels, 12).tolist())
        amps = {s * a * c.norm for a in c.amplitudes for s in (-1, 1)}
        assert levels == set(np.round(sorted(amps), 12).tolist())
        e1d = float((c.level_prior * c.levels**2).sum())
        assert e1d == pytest.approx(0.5, abs=1e-9)


def test_sign_llr_spec_value():
    c = mp.PamConstellation(m=2, prior=np.array([0.5, 0.5]), norm=1.0)
    expect = math.log((1 + math.exp(-2)) / (math.exp(-2) + math.exp(-8)))
    assert mp.sign_llr(c, 1.0, 1.0) == pytest.approx(expect, abs=1e-12)
    assert mp.sign_llr(c, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    # monotone increase toward +inf
    ys = np.linspace(0, 12, 40)
    llrs = mp.sign_llr(c, ys, 1.0)
    assert (np.diff(llrs) > 0).all()


def test_sign_llr_bpsk_reduction():
    c = mp.PamConstellation(m=1, prior=np.array([1.0]), norm=0.7)
    for y in (-2.0, -0.3, 0.0, 1.1):
        assert mp.sign_llr(c, y, 0.4) == pytest.approx(2 * y * 0.7 / 0.4, abs=1e-12)


def test_amplitude_hd_examples():
    c = mp.make_pam(3)
    assert mp.amplitude_hd(c, 2.9 * c.norm, 0).tolist() == [0, 1]
    assert mp.amplitude_hd(c, -0.2 * c.norm, 1).tolist() == [0, 0]
    # boundary exactly between levels 1 and 3 resolves to the lower one
    assert mp.amplitude_hd(c, 2.0 * c.norm, 0).tolist() == [0, 0]


def test_lrb_conventions_roundtrip():
    c = mp.make_pam(3)
    rng = np.random.default_rng(0)
    sign = rng.integers(0, 2, size=500)
    amp = rng.integers(0, 2, size=(500, 2))
    x = mp.pam_map(c, sign, amp)
    lrb = mp.lrb_of(sign, amp, "set-partition")
    # the set-partition bit alternates along the ordered levels
    order = np.argsort(x)
    idx = np.searchsorted(np.sort(c.levels), x[order])
    assert (lrb[order] == idx % 2).all()
    s2, a2 = mp.coset_hd(c, x, lrb)
    assert (s2 == sign).all() and (a2 == amp).all()
    assert (mp.sign_from_lrb(lrb, amp) == sign).all()
    assert (mp.lrb_of(sign, amp, "sign") == sign).all()


def test_level_llr_sign_consistency():
    c = mp.make_pam(3)
    rng = np.random.default_rng(1)
    sign = rng.integers(0, 2, size=4000)
    amp = rng.integers(0, 2, size=(4000, 2))
    x = mp.pam_map(c, sign, amp)
    lrb = mp.lrb_of(sign, amp)
    llr = mp.level_llr(c, x + rng.standard_normal(4000) * 0.02, 0.02**2)
    assert ((llr < 0) == lrb.astype(bool)).all()


def test_gray_qam_llr_against_full_enumeration():
    rng = np.random.default_rng(2)
    for m in (2, 3, 4):  # 16-, 64-, 256-QAM
        g = mp.GrayPam(m)
        pts = (g.levels[:, None] + 1j * g.levels[None, :]).ravel()
        nb = 1 << m
        bits_i = g.level_bits[np.repeat(np.arange(nb), nb)]
        bits_q = g.level_bits[np.tile(np.arange(nb), nb)]
        allbits = np.concatenate([bits_i, bits_q], axis=1)
        assert np.abs(pts) ** 2 @ np.ones(nb * nb) / (nb * nb) == pytest.approx(1.0)
        for s2 in (0.02, 0.1, 0.6):
            y = rng.normal(size=25) * 0.6 + 1j * rng.normal(size=25) * 0.6
            llr = mp.gray_qam_llr(m, y, s2)
            metric = -np.abs(y[:, None] - pts[None, :]) ** 2 / (2 * s2)
            for b in range(2 * m):
                sel = allbits[:, b] == 0
                ref = (_lse(metric[:, sel]) - _lse(metric[:, ~sel]))
                assert np.allclose(llr[:, b], ref, atol=1e-9)


def _lse(a):
    peak = a.max(axis=1, keepdims=True)
    return np.log(np.exp(a - peak).sum(axis=1)) + peak[:, 0]


def test_gray_llr_high_snr_signs():
    g = mp.GrayPam(3)
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=(10000, 3)).astype(np.uint8)
    x = mp.gray_pam_map(g, bits)
    llr = mp.gray_pam_llr(g, x + rng.standard_normal(10000) * 0.01, 1e-4)
    assert ((llr < 0).astype(np.uint8) == bits).all()


def test_gray_qam_zero_symmetry():
    llr = mp.gray_qam_llr(1, np.array([0.0 + 0.0j]), 1.0)
    assert np.allclose(llr, 0.0, atol=1e-12)


def test_llr_guards():
    c = mp.make_pam(2)
    with pytest.raises(ValueError):
        mp.sign_llr(c, 0.1, 0.0)
    with pytest.raises(ValueError):
        mp.level_llr(c, 0.1, -1.0)
