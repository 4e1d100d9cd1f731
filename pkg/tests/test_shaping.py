"""Distribution matchers: exact counting, round trips, selection rules."""

import itertools
import math

import numpy as np
import pytest

from cmshape import shaping as sh


def brute_force_sequences(alphabet, n, e_max=None, counts=None):
    out = []
    for seq in itertools.product(alphabet, repeat=n):
        if e_max is not None and sum(a * a for a in seq) > e_max:
            continue
        if counts is not None:
            have = [seq.count(a) for a in alphabet]
            if have != list(counts):
                continue
        out.append(seq)
    return out


def test_multinomial_counts():
    assert sh.multinomial_count(sh.Composition((1, 3), (2, 2), 2)) == 6
    assert sh.multinomial_count(sh.Composition((1, 3, 5), (4, 0, 0), 0)) == 1
    assert sh.multinomial_count(sh.Composition((1, 3, 5, 7), (1, 1, 1, 1), 4)) == 24


def test_ccdm_lexicographic_first_half():
    comp = sh.Composition((1, 3), (2, 2), 2)
    seqs = [tuple(sh.ccdm_encode(comp, [(i >> 1) & 1, i & 1])) for i in range(4)]
    allperm = sorted(set(itertools.permutations((1, 1, 3, 3))))
    assert seqs == allperm[:4]
    for i, s in enumerate(allperm):
        if i < 4:
            bits = sh.ccdm_decode(comp, s)
            assert (i >> 1) & 1 == bits[0] and i & 1 == bits[1]
        else:
            with pytest.raises(sh.IndexRangeError):
                sh.ccdm_decode(comp, s)


def test_ccdm_type_violation():
    comp = sh.Composition((1, 3), (2, 2), 2)
    with pytest.raises(sh.CompositionViolation):
        sh.ccdm_decode(comp, (3, 3, 3, 1))
    with pytest.raises(sh.CompositionViolation):
        sh.ccdm_decode(comp, (1, 1, 3))


def test_ccdm_roundtrip_and_type():
    comp = sh.select_composition((1, 3, 5, 7), 200, 1.87)
    assert comp.bits_in == 374
    assert sh.multinomial_count(comp) >= 2**374
    rng = np.random.default_rng(0)
    for _ in range(300):
        bits = rng.integers(0, 2, size=374)
        seq = sh.ccdm_encode(comp, bits)
        counts = [int((seq == a).sum()) for a in comp.alphabet]
        assert counts == list(comp.counts)
        assert (sh.ccdm_decode(comp, seq) == bits).all()


def test_ccdm_injective_small():
    comp = sh.Composition((1, 3), (5, 5), 7)  # C(10,5)=252 >= 128
    seen = set()
    for i in range(2**7):
        bits = [(i >> t) & 1 for t in range(6, -1, -1)]
        seen.add(tuple(sh.ccdm_encode(comp, bits)))
    assert len(seen) == 2**7


def test_select_composition_edges():
    comp = sh.select_composition((1, 3, 5, 7), 50, 0.0)
    assert comp.counts == (50, 0, 0, 0) and comp.bits_in == 0
    with pytest.raises(ValueError):
        sh.select_composition((1, 3, 5, 7), 50, 2.0)  # uniform full rate
    with pytest.raises(ValueError):
        sh.select_composition((1, 3), 10, 1.5)


def test_ess_enumeration_examples():
    assert sh.select_emax((1, 3), 2, 1) == 10
    shp = sh.make_ess((1, 3), 2, 1)
    assert shp.trellis.total == 3
    assert sh.ess_encode(shp, [0]).tolist() == [1, 1]
    assert sh.ess_encode(shp, [1]).tolist() == [1, 3]
    with pytest.raises(sh.EnergyViolation):
        sh.ess_decode(shp, [3, 3])


def test_select_emax_edges_and_monotonicity():
    assert sh.select_emax((1, 3), 4, 0) == 4  # all-ones energy
    prev = 0
    for bits in range(0, 7):
        e = sh.select_emax((1, 3, 5, 7), 8, bits)
        assert e >= prev
        prev = e
    with pytest.raises(ValueError):
        sh.select_emax((1, 3), 4, 9)


def test_ess_trellis_matches_brute_force():
    for alphabet in ((1, 3), (1, 3, 5), (1, 3, 5, 7)):
        for n in (2, 4, 6, 8):
            if len(alphabet) ** n > 70000:
                continue
            for e_max in (n, n + 16, n + 48, 200):
                tr = sh.build_trellis(alphabet, n, e_max)
                all_seqs = brute_force_sequences(alphabet, n, e_max=tr.e_max)
                assert tr.total == len(all_seqs)


def test_ess_index_is_lexicographic():
    shp = sh.make_ess((1, 3, 5), 4, 4)
    seqs = sorted(brute_force_sequences((1, 3, 5), 4, e_max=shp.e_max))
    assert len(seqs) >= 2**4
    for i in range(2**4):
        bits = [(i >> t) & 1 for t in range(3, -1, -1)]
        assert tuple(sh.ess_encode(shp, bits)) == seqs[i]
        assert (sh.ess_decode(shp, seqs[i]) == bits).all()


def test_ess_roundtrip_n200():
    shp = sh.make_ess((1, 3, 5, 7), 200, 374)
    rng = np.random.default_rng(1)
    for _ in range(200):
        bits = rng.integers(0, 2, size=374)
        seq = sh.ess_encode(shp, bits)
        assert int((seq.astype(np.int64) ** 2).sum()) <= shp.e_max
        assert (sh.ess_decode(shp, seq) == bits).all()


def test_rate_loss_properties():
    c200 = sh.select_composition((1, 3, 5, 7), 200, 1.87)
    c1024 = sh.select_composition((1, 3, 5, 7), 1024, 1.87)
    r200, r1024 = sh.rate_loss(c200), sh.rate_loss(c1024)
    assert r200 >= 0 and r1024 >= 0
    assert r200 > r1024  # short blocks pay more
    degenerate = sh.Composition((1, 3), (8, 0), 0)
    assert sh.rate_loss(degenerate) == 0.0
    ess = sh.make_ess((1, 3, 5, 7), 200, 374)
    assert sh.rate_loss(ess, sample_blocks=50) >= 0
