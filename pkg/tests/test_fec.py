"""LDPC construction, encoding, decoding, and the alist interchange."""

from fractions import Fraction

import numpy as np
import pytest

from cmshape import fec


def test_load_code_parity_counts():
    code = fec.load_code(Fraction(2, 3), 64800)
    assert code.m_rows == 21600
    code = fec.load_code(Fraction(9, 10), 64800)
    assert code.m_rows == 6480
    with pytest.raises(ValueError):
        fec.load_code(Fraction(5, 7), 64800)
    with pytest.raises(ValueError):
        fec.load_code(Fraction(2, 3), 4242)


def test_row_degrees_match_standard_profile():
    expect = {Fraction(3, 5): 11, Fraction(2, 3): 10, Fraction(4, 5): 18,
              Fraction(8, 9): 27, Fraction(9, 10): 30}
    for rate, deg in expect.items():
        code = fec.load_code(rate, 64800)
        degs = (code.row_edges >= 0).sum(axis=1)
        assert degs.max() == deg
        assert degs.min() >= deg - 1  # first staircase row has one edge less


def test_encode_systematic_and_syndrome():
    code = fec.load_code(Fraction(2, 3), 648)
    rng = np.random.default_rng(0)
    zero = fec.encode(code, np.zeros(code.k_info, dtype=np.uint8))
    assert not zero.any()
    for _ in range(100):
        u = rng.integers(0, 2, size=code.k_info).astype(np.uint8)
        c = fec.encode(code, u)
        assert (c[: code.k_info] == u).all()
        assert fec.syndrome_ok(code, c)
    with pytest.raises(ValueError):
        fec.encode(code, np.zeros(5, dtype=np.uint8))


def test_decode_noiseless_and_degenerate():
    code = fec.load_code(Fraction(1, 2), 648)
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, size=code.k_info).astype(np.uint8)
    c = fec.encode(code, u)
    llr = 8.0 * (1.0 - 2.0 * c.astype(np.float64))
    bits, conv, iters = fec.decode(code, llr)
    assert conv and iters <= 1 and (bits == c).all()
    bits, conv, iters = fec.decode(code, np.zeros(code.n_code), max_iters=12)
    assert not conv and iters <= 12
    with pytest.raises(ValueError):
        fec.decode(code, llr, max_iters=0)


def test_decode_deterministic_and_corrects_noise():
    code = fec.load_code(Fraction(1, 2), 648)
    rng = np.random.default_rng(2)
    u = rng.integers(0, 2, size=code.k_info).astype(np.uint8)
    c = fec.encode(code, u)
    x = 1.0 - 2.0 * c.astype(np.float64)
    sigma = 0.75
    y = x + rng.standard_normal(code.n_code) * sigma
    llr = 2.0 * y / sigma**2
    b1 = fec.decode(code, llr)
    b2 = fec.decode(code, llr.copy())
    assert (b1[0] == b2[0]).all() and b1[1] == b2[1] and b1[2] == b2[2]


def test_ber_monotonic_in_snr_smoke():
    code = fec.load_code(Fraction(1, 2), 648)
    rng = np.random.default_rng(3)
    bers = []
    for snr_db in (0.0, 1.5, 3.0):
        sigma = (2 * 0.5 * 10 ** (snr_db / 10)) ** -0.5
        errs = 0
        bits = 0
        for _ in range(60):
            u = rng.integers(0, 2, size=code.k_info).astype(np.uint8)
            c = fec.encode(code, u)
            y = 1.0 - 2.0 * c + rng.standard_normal(code.n_code) * sigma
            out, _, _ = fec.decode(code, 2.0 * y / sigma**2)
            errs += int((out[: code.k_info] != u).sum())
            bits += code.k_info
        bers.append(errs / bits)
    assert bers[0] > bers[2]  # allow noise at the middle point


def test_alist_roundtrip(tmp_path):
    code = fec.load_code(Fraction(2, 3), 648)
    path = tmp_path / "code.alist"
    fec.write_alist(code, path)
    loaded = fec.read_alist(path)
    assert loaded.n_code == code.n_code and loaded.k_info == code.k_info
    rng = np.random.default_rng(4)
    u = rng.integers(0, 2, size=code.k_info).astype(np.uint8)
    assert (fec.encode(loaded, u) == fec.encode(code, u)).all()


def test_hd_fec_model_constants():
    model = fec.HdFecModel()
    assert model.rate == Fraction(239, 255)
    assert model.ber_threshold == 4.5e-3
