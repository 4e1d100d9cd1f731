"""Lattice quantizers against the enumeration oracle, plus SNF machinery."""

import collections
import math
from fractions import Fraction

import numpy as np
import pytest

from cmshape import lattices as lat


def test_round_half_down_tie_rule():
    x = np.array([0.4, -1.6, 0.5, -0.5, 1.5])
    assert lat._round_half_down(x).tolist() == [0.0, -2.0, 0.0, -1.0, 1.0]


def test_zn_quantize_example():
    z2 = lat.get_lattice("Z2")
    assert lat.quantize(z2, [0.4, -1.6]).tolist() == [0.0, -2.0]


def test_e8_fixed_point():
    e8 = lat.get_lattice("E8")
    assert lat.quantize(e8, np.zeros(8)).tolist() == [0.0] * 8


def test_golay_weight_distribution():
    cw = lat.golay_codewords()
    weights = collections.Counter(cw.sum(axis=1).tolist())
    assert weights == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}
    # self-dual: generator rows are pairwise orthogonal mod 2
    gen = lat.golay_generator()
    assert not ((gen @ gen.T) % 2).any()


def test_leech_generator_invariants():
    g = lat.leech_generator_int()
    assert abs(lat._int_det(g)) == 2**36
    for row in g:
        assert lat.leech_contains_scaled(row)
    lam = lat.get_lattice("Lambda24")
    det_sq = lam.det_effective_sq()
    assert det_sq == 1  # unimodular scaling
    assert lam.min_norm_sq == 4


def test_leech_random_vectors_min_norm():
    # random nonzero integer combinations have squared norm >= 4 (scaled)
    lam = lat.get_lattice("Lambda24")
    rng = np.random.default_rng(7)
    coeffs = rng.integers(-3, 4, size=(100_000, 24))
    coeffs = coeffs[(coeffs != 0).any(axis=1)]
    pts = coeffs @ lam.basis
    norms = (pts**2).sum(axis=1)
    assert norms.min() >= 4 - 1e-9


def test_leech_perturbation_recovers_point():
    lam = lat.get_lattice("Lambda24")
    rng = np.random.default_rng(8)
    coeffs = rng.integers(-2, 3, size=(50, 24))
    pts = coeffs @ lam.basis
    noise = rng.standard_normal((50, 24))
    noise *= (0.98 / np.linalg.norm(noise, axis=1))[:, None]
    dec = lat.quantize(lam, pts + noise)
    assert np.allclose(dec, pts, atol=1e-9)


@pytest.mark.parametrize("name,count,radius_sq", [
    ("D4", 400, 1), ("E8", 300, 1), ("Z24", 100, 6), ("Lambda24", 150, 2)])
def test_quantize_matches_brute_force(name, count, radius_sq):
    lattice = lat.get_lattice(name)
    rng = np.random.default_rng(hash(name) % 2**32)
    ys = rng.uniform(-3.0, 3.0, size=(count, lattice.dim))
    fast = lat.quantize(lattice, ys)
    radius = math.sqrt(radius_sq) + 1e-9
    for i in range(count):
        ref = lat.brute_force_quantize(lattice, ys[i], radius)
        d_ref = ((ys[i] - ref) ** 2).sum()
        d_fast = ((ys[i] - fast[i]) ** 2).sum()
        assert d_fast <= d_ref + 1e-9


def test_brute_force_tie_break_deep_hole():
    z2 = lat.get_lattice("Z2")
    pt = lat.brute_force_quantize(z2, [0.5, 0.5], radius=0.8)
    assert pt.tolist() == [0.0, 0.0]


def test_brute_force_radius_guard():
    z2 = lat.get_lattice("Z2")
    with pytest.raises(lat.EnumerationError):
        lat.brute_force_quantize(z2, [0.3, 0.3], radius=0.1)


def test_brute_force_lattice_point_identity():
    d4 = lat.get_lattice("D4")
    p = np.array([1.0, 1.0, 0.0, 0.0])
    assert lat.brute_force_quantize(d4, p, radius=1.1).tolist() == p.tolist()


def test_scaled_copies():
    lam = lat.get_lattice("Lambda24", scale=8)
    rng = np.random.default_rng(3)
    y = rng.uniform(-10, 10, size=(20, 24))
    base = lat.get_lattice("Lambda24")
    assert np.allclose(lat.quantize(lam, y), 8 * lat.quantize(base, y / 8))


def test_mod_lattice_properties():
    z2 = lat.get_lattice("Z2", scale=4)
    r = lat.mod_lattice(z2, [4.5, 0.5])
    assert r.tolist() == [0.5, 0.5]
    rng = np.random.default_rng(5)
    pair = lat.leech_pair(72)
    y = rng.uniform(-20, 20, size=(40, 24))
    r1 = lat.mod_lattice(pair, y)
    # idempotence and invariance under shaping-lattice shifts
    assert np.allclose(lat.mod_lattice(pair, r1), r1, atol=1e-9)
    shift = (rng.integers(-1, 2, size=(40, 24)) @ pair.shaping.basis)
    r2 = lat.mod_lattice(pair, y + shift)
    assert np.allclose(r1, r2, atol=1e-6)
    # result lies in the Voronoi region: quantize gives zero
    q = lat.quantize(pair.shaping, r1)
    assert np.abs(q).max() == 0.0


def test_unknown_lattice_and_no_decoder():
    with pytest.raises(ValueError):
        lat.get_lattice("Q17")
    custom = lat.LatticeDef("custom", 2,
                            ((Fraction(2), Fraction(1)), (Fraction(0), Fraction(1))))
    with pytest.raises(lat.NoExactDecoderError):
        lat.quantize(custom, [0.1, 0.2])


def test_generator_file_roundtrip(tmp_path):
    path = tmp_path / "gen.txt"
    path.write_text("# demo\n2 1/2\n0 1\n")
    loaded = lat.load_generator_file(path, name="demo")
    assert loaded.dim == 2
    assert loaded.generator[0][1] == Fraction(1, 2)
    with pytest.raises(lat.NoExactDecoderError):
        lat.quantize(loaded, [0.0, 0.0])
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1\n1 1\n")
    with pytest.raises(ValueError):
        lat.load_generator_file(bad)


def test_smith_normal_form_examples():
    u, d, v = lat.smith_normal_form(np.eye(3, dtype=int))
    assert np.array_equal(d, np.eye(3, dtype=int))
    u, d, v = lat.smith_normal_form(np.diag([2, 4]))
    assert np.array_equal(np.diagonal(d), [2, 4])
    # 8 x (unimodular) has SNF 8I
    m = 8 * np.array([[1, 1], [0, 1]])
    u, d, v = lat.smith_normal_form(m)
    assert np.array_equal(np.diagonal(d), [8, 8])
    assert np.array_equal(u @ m @ v, d)
    with pytest.raises(ValueError):
        lat.smith_normal_form([[1, 1], [1, 1]])


def test_smith_normal_form_random_property():
    rng = np.random.default_rng(11)
    done = 0
    while done < 25:
        m = rng.integers(-6, 7, size=(4, 4))
        if lat._int_det(m.tolist()) == 0:
            continue
        u, d, v = lat.smith_normal_form(m)
        assert np.array_equal(u @ m @ v, d)
        diag = np.diagonal(d)
        assert (diag > 0).all()
        assert all(diag[i + 1] % diag[i] == 0 for i in range(3))
        assert abs(lat._int_det(u.tolist())) == 1
        assert abs(lat._int_det(v.tolist())) == 1
        done += 1


def test_nested_pair_validation():
    z2 = lat.get_lattice("Z2")
    d2 = lat.get_lattice("D2")
    pair = lat.nested_pair(z2, d2.scaled(2))  # index 8 = 2^3
    assert pair.index_log2 == 3
    with pytest.raises(ValueError):
        lat.nested_pair(z2, lat.get_lattice("Z2", scale=3))  # index 9
    e8 = lat.get_lattice("E8")
    with pytest.raises(ValueError):
        lat.nested_pair(e8, z2)


def test_shipped_pairs_snf():
    p72 = lat.leech_pair(72)
    assert set(p72.snf_diag) == {8} and p72.index_log2 == 72
    p96 = lat.leech_pair(96)
    assert set(p96.snf_diag) == {16} and p96.index_log2 == 96
    c72 = lat.cubic_leech_pair(72)
    assert c72.index_log2 == 72
    assert math.prod(c72.snf_diag) == 2**72
    c96 = lat.cubic_leech_pair(96)
    assert c96.index_log2 == 96


def test_cubic_shaping_lattice_is_leech_similar():
    sim = lat.get_leech_similar()
    b = np.array([[int(x) for x in row] for row in sim.generator])
    gram = b @ b.T
    gl = lat.leech_generator_int()
    assert np.array_equal(gram, 8 * (gl @ gl.T))
    # shaping lattice decoder agrees with brute force
    rng = np.random.default_rng(13)
    ys = rng.uniform(-8, 8, size=(25, 24))
    fast = lat.quantize(sim, ys)
    for i in range(25):
        ref = lat.brute_force_quantize(sim, ys[i], math.sqrt(128) + 1e-9)
        assert ((ys[i] - fast[i]) ** 2).sum() <= ((ys[i] - ref) ** 2).sum() + 1e-9
