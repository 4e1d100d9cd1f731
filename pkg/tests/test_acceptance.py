"""Acceptance suite: every shipped criterion at its stated tolerance.

Each test prints one PASS/FAIL line.  The statistical reproductions pin
seed, SNR grids, and stop rules, so reruns are bit-identical; sweeps are
cached per session (the full module is a multi-core half-hour).
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cmshape import chains, fec, harness, lattices as lat, shaping as sh
from cmshape import voronoi as vor
from cmshape.presets import TABLE_ROWS, get_preset

THRESHOLD = fec.HdFecModel().ber_threshold
SEED = 11

ACCEPT_GRIDS = {
    "vc24-72-mlc": (17.1, 17.2, 17.3, 17.4, 17.5),
    "ps64qam-ccdm200": (17.5, 17.6, 17.7, 17.8, 17.9),
    "ps64qam-ccdm1024": (17.2, 17.3, 17.4, 17.5, 17.6),
    "ps64qam-ess200": (17.2, 17.3, 17.4, 17.5),
    "qam64-bicm": (17.8, 18.0, 18.2),
    "vc24-96-mlc": (22.5, 22.6, 22.7, 22.8, 22.9),
    "ps256qam-ccdm200": (23.6, 23.75, 23.9, 24.05),
    "ps256qam-ccdm1024": (22.9, 23.0, 23.1, 23.2, 23.3),
    "ps256qam-ess200": (22.8, 22.9, 23.0, 23.1, 23.2),
    "qam256-bicm": (23.7, 23.85, 24.0, 24.15, 24.3),
    "ps256qam-rs187-ccdm200": (17.4, 17.5, 17.6, 17.7, 17.8),
    "ps256qam-rs187-ess200": (16.9, 16.95, 17.0, 17.02, 17.04, 17.08),
}

_SWEEPS: dict[str, list] = {}


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def sweep(preset: str) -> list:
    if preset not in _SWEEPS:
        spec = harness.RunSpec(
            preset=preset, snrs_db=ACCEPT_GRIDS[preset],
            stop=harness.StopRule(min_errors=200, min_bits=2_000_000,
                                  max_bits=30_000_000),
            seed=SEED)
        _SWEEPS[preset] = harness.run_sweep(spec, workers=2)
    return _SWEEPS[preset]


def crossing(preset: str) -> float:
    return harness.snr_at_ber(sweep(preset), THRESHOLD)


# ---------------------------------------------------------------------------
# exact / oracle criteria
# ---------------------------------------------------------------------------

def test_rate_audit_exact():
    t0 = time.time()
    expected = ["5.33", "5.33", "5.34", "7.2", "7.2", "7.2", "5.34"]
    got = [chains.format_rate(chains.compute_rate(get_preset(n))) for n in TABLE_ROWS]
    took = time.time() - t0
    _verdict("rate-audit", got == expected and took < 1.0,
             f"rates {got}, {took * 1000:.0f} ms")


def test_matcher_correctness():
    t0 = time.time()
    rng = np.random.default_rng(SEED)
    alphabet = (1, 3, 5, 7)
    trials = 10_000
    ok = True
    notes = []
    for n in (200, 1024):
        comp = sh.select_composition(alphabet, n, 1.87)
        bad = 0
        for _ in range(trials):
            bits = rng.integers(0, 2, size=comp.bits_in)
            seq = sh.ccdm_encode(comp, bits)
            counts = np.bincount(seq, minlength=8)[list(alphabet)]
            if list(counts) != list(comp.counts):
                bad += 1
            elif not (sh.ccdm_decode(comp, seq) == bits).all():
                bad += 1
        ok &= bad == 0
        notes.append(f"ccdm{n}:{bad}")
        ess = sh.make_ess(alphabet, n, comp.bits_in)
        bad = 0
        for _ in range(trials):
            bits = rng.integers(0, 2, size=ess.bits_in)
            seq = sh.ess_encode(ess, bits)
            if int((seq.astype(np.int64) ** 2).sum()) > ess.e_max:
                bad += 1
            elif not (sh.ess_decode(ess, seq) == bits).all():
                bad += 1
        ok &= bad == 0
        notes.append(f"ess{n}:{bad}")
    # trellis counts equal exhaustive enumeration for small instances
    mism = 0
    for alpha_n in (2, 3, 4):
        alpha = alphabet[:alpha_n]
        for n in range(2, 9):
            if alpha_n**n > 70000:
                continue
            for e_max in (n, n + 32, 200):
                tr = sh.build_trellis(alpha, n, e_max)
                count = sum(1 for seq in itertools.product(alpha, repeat=n)
                            if sum(a * a for a in seq) <= tr.e_max)
                mism += int(count != tr.total)
    ok &= mism == 0
    took = time.time() - t0
    ok &= took < 120.0
    _verdict("matcher-correctness", ok,
             f"{' '.join(notes)} trellis-mismatches:{mism} in {took:.0f}s")


def test_rate_loss_direction():
    t0 = time.time()
    r200 = sh.rate_loss(sh.select_composition((1, 3, 5, 7), 200, 1.87))
    r1024 = sh.rate_loss(sh.select_composition((1, 3, 5, 7), 1024, 1.87))
    took = time.time() - t0
    ok = r200 > r1024 and took < 10.0
    _verdict("rate-loss-direction", ok,
             f"loss(200)={r200:.4f} > loss(1024)={r1024:.4f}, {took:.1f}s")


def test_lattice_and_vc_correctness():
    t0 = time.time()
    rng = np.random.default_rng(SEED + 1)
    mismatches = 0
    for name, radius_sq in (("D4", 1), ("E8", 1), ("Lambda24", 2)):
        lattice = lat.get_lattice(name)
        ys = rng.uniform(-2.5, 2.5, size=(1000, lattice.dim))
        fast = lat.quantize(lattice, ys)
        radius = math.sqrt(radius_sq) + 1e-9
        for i in range(1000):
            ref = lat.brute_force_quantize(lattice, ys[i], radius)
            if ((ys[i] - fast[i]) ** 2).sum() > ((ys[i] - ref) ** 2).sum() + 1e-9:
                mismatches += 1
    # exhaustive bijectivity at small index
    z2 = lat.get_lattice("Z2")
    small = vor.make_voronoi_code(lat.nested_pair(z2, z2.scaled(4)), energy_norm=1.0)
    small_ok = all(
        (vor.vc_decode(small, vor.vc_encode(small, list(b))) == b).all()
        for b in itertools.product((0, 1), repeat=4))
    # sampled bijectivity and membership at 2^72
    code = vor.make_voronoi_code(lat.cubic_leech_pair(72))
    bits = rng.integers(0, 2, size=(10_000, 72)).astype(np.uint8)
    pts = vor.vc_encode(code, bits)
    round_ok = bool((vor.vc_decode(code, pts) == bits).all())
    distinct_ok = len({p.tobytes() for p in pts}) == len(pts)
    u = (pts / code.energy_norm + code.offset) @ np.linalg.inv(code.pair.coding.basis)
    member_ok = bool(np.allclose(u, np.rint(u), atol=1e-6))
    region_ok = bool(np.abs(lat.quantize(code.pair.shaping,
                                         pts / code.energy_norm)).max() == 0.0)
    took = time.time() - t0
    ok = (mismatches == 0 and small_ok and round_ok and distinct_ok
          and member_ok and region_ok and took < 300.0)
    _verdict("lattice-vc-correctness", ok,
             f"oracle-mismatches:{mismatches} small:{small_ok} "
             f"roundtrip:{round_ok} member:{member_ok and region_ok} {took:.0f}s")


def test_demapper_fidelity():
    t0 = time.time()
    d4 = lat.get_lattice("D4")
    code = vor.make_voronoi_code(lat.nested_pair(d4, d4.scaled(4)))  # 256 points
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    mrb_bad = 0
    for sigma2_scale in (0.05, 0.2, 0.8):
        sigma2 = sigma2_scale * code.energy_norm**2
        bits = rng.integers(0, 2, size=(120, code.k)).astype(np.uint8)
        y = vor.vc_encode(code, bits) + rng.standard_normal((120, 4)) * math.sqrt(sigma2)
        llr = chains.vc_lrb_llr_batch(code, y, sigma2)
        lrbs = rng.integers(0, 2, size=(120, code.q)).astype(np.uint8)
        mrb = chains.vc_mrb_hard_decision_batch(code, y, lrbs)
        for i in range(len(y)):
            ref = _llr_oracle(code, y[i], sigma2)
            worst = max(worst, float(np.abs(ref - llr[i]).max()))
            if not (mrb[i] == _mrb_oracle(code, y[i], lrbs[i])).all():
                mrb_bad += 1
    took = time.time() - t0
    ok = worst <= 1e-9 and mrb_bad == 0 and took < 120.0
    _verdict("demapper-fidelity", ok,
             f"max|llr diff|={worst:.2e} mrb mismatches={mrb_bad} {took:.0f}s")


def _llr_oracle(code, y_block, sigma2):
    lat_c = code.pair.coding
    norm = code.energy_norm
    yl = y_block / norm + code.offset
    cands = lat._enumerate_basis(lat_c.basis, yl,
                                 2.5 * math.sqrt(float(lat_c.covering_radius_sq)))
    d = ((cands - yl) ** 2).sum(axis=1)
    chat = cands[np.argmin(d)]
    d0 = d.min()
    labels = code.lattice_point_labels(chat[None, :])[0]
    out = np.empty(code.q)
    for i in range(code.q):
        shift = chat + code.lrb_moves[i]
        r = yl - shift
        pts = lat._enumerate_basis(2.0 * lat_c.basis, r,
                                   4.0 * math.sqrt(float(lat_c.covering_radius_sq)))
        d1 = ((pts - r) ** 2).sum(axis=1).min()
        diff = (d1 - d0) * norm * norm / (2.0 * sigma2)
        out[i] = diff if (labels[i] & 1) == 0 else -diff
    return out


def _mrb_oracle(code, y_block, lrbs):
    lat_c = code.pair.coding
    yl = y_block / code.energy_norm + code.offset
    shift = code.lrb_coset_shift(lrbs[None, :])[0]
    r = yl - shift
    pts = lat._enumerate_basis(2.0 * lat_c.basis, r,
                               4.0 * math.sqrt(float(lat_c.covering_radius_sq)))
    best = pts[np.argmin(((pts - r) ** 2).sum(axis=1))] + shift
    return code.labels_to_bits(code.lattice_point_labels(best[None, :]))[0][code.mrb_positions]


# ---------------------------------------------------------------------------
# statistical criteria (pre-HD-FEC BER threshold 4.5e-3)
# ---------------------------------------------------------------------------

def test_fig2a_reproduction():
    vc = crossing("vc24-72-mlc")
    ccdm200 = crossing("ps64qam-ccdm200")
    ccdm1024 = crossing("ps64qam-ccdm1024")
    bicm = crossing("qam64-bicm")
    ess200 = crossing("ps64qam-ess200")
    gain200 = ccdm200 - vc
    gain1024 = ccdm1024 - vc
    order_ok = vc < min(ccdm200, ccdm1024, ess200) and \
        bicm > max(ccdm200, ccdm1024, ess200)
    ok = abs(gain200 - 0.61) <= 0.25 and abs(gain1024 - 0.15) <= 0.15 and order_ok
    _verdict("fig2a", ok,
             f"vc={vc:.3f} ccdm200=+{gain200:.2f} (0.61+-0.25) "
             f"ccdm1024=+{gain1024:.2f} (0.15+-0.15) "
             f"order {'ok' if order_ok else 'BAD'} bicm={bicm:.3f}")


def test_fig2b_reproduction():
    vc96 = crossing("vc24-96-mlc")
    ccdm200 = crossing("ps256qam-ccdm200")
    gain = ccdm200 - vc96
    vc72 = crossing("vc24-72-mlc")
    positives = {
        "64ccdm200": crossing("ps64qam-ccdm200") - vc72,
        "64ccdm1024": crossing("ps64qam-ccdm1024") - vc72,
        "64ess200": crossing("ps64qam-ess200") - vc72,
        "256ccdm1024": crossing("ps256qam-ccdm1024") - vc96,
        "256ess200": crossing("ps256qam-ess200") - vc96,
    }
    all_positive = all(v > 0 for v in positives.values())
    ok = abs(gain - 1.3) <= 0.3 and all_positive
    _verdict("fig2b", ok,
             f"vc96={vc96:.3f} gain over ps256-ccdm200 = {gain:.2f} (1.3+-0.3); "
             + " ".join(f"{k}:+{v:.2f}" for k, v in positives.items()))


def test_fig3_reproduction():
    vc72 = crossing("vc24-72-mlc")
    ccdm = crossing("ps256qam-rs187-ccdm200")
    ess = crossing("ps256qam-rs187-ess200")
    gain_ccdm = ccdm - vc72
    parity = ess - vc72
    ok = abs(gain_ccdm - 0.28) <= 0.2 and abs(parity) <= 0.2
    _verdict("fig3", ok,
             f"ccdm gain {gain_ccdm:+.2f} (0.28+-0.2), ess parity {parity:+.2f} (+-0.2)")


def test_threshold_brackets():
    vc72 = crossing("vc24-72-mlc")
    vc96 = crossing("vc24-96-mlc")
    ok = abs(vc72 - 17.2) <= 0.5 and abs(vc96 - 22.6) <= 0.5
    _verdict("threshold-brackets", ok,
             f"vc72={vc72:.3f} (17.2+-0.5) vc96={vc96:.3f} (22.6+-0.5)")
