"""Voronoi constellations over nested lattice pairs.

A VC is the set (coding lattice - offset) intersected with the Voronoi
region of the shaping sublattice.  Encoding maps k bits to per-coordinate
integers (natural binary, LSB first within each coordinate's bit group)
and then to a lattice point reduced modulo the shaping lattice; the energy
normalization makes the mean transmit energy 1 per 2-D.

Labels: when the shaping lattice sits inside 2x the coding lattice (true
for every shipped pair) the least-reliable bit of coordinate j is the
plain mod-2 coset bit of that coordinate, and the remaining bits index the
quotient of the halved basis change through its Smith normal form.  Pairs
without that property fall back to labeling the SNF coordinates directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattices import (NestedLatticePair, hermite_diagonal_form, mod_lattice,
                        quantize, reduce_to_hnf_box)

# Monte-Carlo mean raw symbol energies (lattice coordinates, 10^6 uniform
# random labels, fixed seed) for the shipped pairs; regenerate with
# VoronoiCode.calibrate_energy().  Keyed by (coding name, shaping name, k).
_ENERGY_CACHE: dict[tuple, float] = {
    ("Lambda24", "8*Lambda24", 72): 101.233065,
    ("Lambda24", "16*Lambda24", 96): 404.211755,
    ("Z24", "LeechSim24", 72): 101.252976,
    ("Z24", "2*LeechSim24", 96): 404.181824,
}

_CAL_SAMPLES = 1_000_000
_CAL_SEED = 20240801


@dataclass(frozen=True, eq=False)
class VoronoiCode:
    """A concrete Voronoi constellation bound to a nested pair.

    `radix` is the Smith-normal-form diagonal of the basis change (the
    spec of the quotient group); `group_radix` is the per-coordinate label
    radix actually used for bit packing (identical for the shipped
    self-similar pairs).
    """

    pair: NestedLatticePair
    offset: np.ndarray = field(repr=False)
    k: int = 0
    q: int = 0
    radix: tuple = ()
    group_radix: tuple = ()
    label_mode: str = "box"  # "box" (Ls within 2*Lc) or "snf"
    energy_norm: float = 1.0
    _hnf: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.pair.dim

    @property
    def spectral_efficiency(self) -> float:
        """Bits per 2-D symbol, exactly 2k/n."""
        return 2.0 * self.k / self.dim

    @cached_property
    def _bit_widths(self) -> np.ndarray:
        return np.array([r.bit_length() - 1 for r in self.group_radix], dtype=np.int64)

    @cached_property
    def _bit_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self._bit_widths)[:-1]])

    @cached_property
    def lrb_positions(self) -> np.ndarray:
        """Bit positions of the q least-reliable bits in the k-bit label."""
        return self._bit_offsets[: self.q].copy()

    @cached_property
    def mrb_positions(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.k), self.lrb_positions)

    @cached_property
    def _coding_basis(self) -> np.ndarray:
        return self.pair.coding.basis

    @cached_property
    def _coding_basis_inv(self) -> np.ndarray:
        return np.linalg.inv(self.pair.coding.basis)

    @cached_property
    def lrb_moves(self) -> np.ndarray:
        """Basis moves (rows) that flip exactly one LRB each."""
        if self.label_mode == "box":
            return self._coding_basis[: self.q].copy()
        return (self.pair.snf_v_inv[: self.q] @ self._coding_basis)

    # -- integer label plumbing -------------------------------------------

    def bits_to_labels(self, bits: np.ndarray) -> np.ndarray:
        """(..., k) bits -> (..., n) per-group integers (LSB-first groups)."""
        bits = np.asarray(bits)
        if bits.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} bits, got {bits.shape[-1]}")
        out = np.zeros(bits.shape[:-1] + (self.dim,), dtype=np.int64)
        for j in range(self.dim):
            off = self._bit_offsets[j]
            for t in range(self._bit_widths[j]):
                out[..., j] += bits[..., off + t].astype(np.int64) << t
        return out

    def labels_to_bits(self, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.int64)
        out = np.zeros(labels.shape[:-1] + (self.k,), dtype=np.uint8)
        for j in range(self.dim):
            off = self._bit_offsets[j]
            for t in range(self._bit_widths[j]):
                out[..., off + t] = (labels[..., j] >> t) & 1
        return out

    def _labels_to_coeffs(self, labels: np.ndarray) -> np.ndarray:
        """Group integers -> coding-basis coefficient vectors.

        In box mode the label integers are themselves the coefficients of
        the HNF-box transversal, so single-step coefficient errors stay
        single-step label errors (no transform amplification).
        """
        if self.label_mode == "box":
            return labels
        return labels @ self.pair.snf_v_inv

    def _coeffs_to_labels(self, u: np.ndarray) -> np.ndarray:
        if self.label_mode == "box":
            return reduce_to_hnf_box(u, self._hnf)
        w = u @ self.pair.snf_v
        return np.mod(w, np.array(self.radix, dtype=np.int64))

    def _encode_labels(self, labels: np.ndarray) -> np.ndarray:
        """Integer labels -> raw (unnormalized) constellation points."""
        u = self._labels_to_coeffs(labels)
        c = u @ self._coding_basis
        return mod_lattice(self.pair.shaping, c - self.offset)

    def _point_to_labels(self, raw_points: np.ndarray) -> np.ndarray:
        """Raw lattice points (exact or decoded) -> integer labels."""
        return self.lattice_point_labels(raw_points + self.offset)

    def lattice_point_labels(self, c: np.ndarray) -> np.ndarray:
        """Integer labels of coding-lattice points c (offset already folded)."""
        u = np.rint(c @ self._coding_basis_inv).astype(np.int64)
        return self._coeffs_to_labels(u)

    def lrb_coset_shift(self, lrb_bits: np.ndarray) -> np.ndarray:
        """A coding-lattice representative of the 2*Lambda coset pinned by
        the given LRB bits.

        Needs q == n (one LSB per coordinate), the shipped configuration;
        with fewer LRBs the coset is not determined by them alone.
        """
        if self.q != self.dim:
            raise ValueError("coset-conditional decisions need q == n")
        ell = np.asarray(lrb_bits, dtype=np.int64)
        if self.label_mode == "box":
            u = ell
        else:
            u = np.mod(ell @ self.pair.snf_v_inv, 2)
        return u @ self._coding_basis

    def calibrate_energy(self, samples: int = _CAL_SAMPLES, seed: int = _CAL_SEED) -> float:
        """Mean raw symbol energy over uniform labels (Monte-Carlo)."""
        rng = np.random.default_rng(np.random.SeedSequence((seed, self.k)))
        total = 0.0
        count = 0
        chunk = 1 << 14
        while count < samples:
            now = min(chunk, samples - count)
            labels = _random_labels(rng, self.group_radix, now)
            pts = self._encode_labels(labels)
            total += float((pts**2).sum())
            count += now
        return total / samples


# i.i.d. full-mantissa offset dithers (uniform over [2^-14, 2^-12), fixed
# draw); see make_voronoi_code
_OFFSET_DITHER = np.array([
    0.00024207462687157364, 0.00016784112878267857, 0.00022013137776935858,
    8.176774017926069e-05, 8.260962901484479e-05, 0.0002075987334131572,
    0.00024179151132918103, 0.00022126467918284868, 0.00011532232615410958,
    8.676279132218549e-05, 0.0002412135796719253, 0.00012931197276339147,
    0.0002203780778723788, 9.987991491123118e-05, 0.0001787392888977516,
    0.00012657710098639983, 0.00011998550441654721, 0.00018072004906318875,
    0.0001844424636124117, 0.00012198349528276997, 0.00022608979106106722,
    0.00018518160331206735, 0.00011844909053296993, 0.00021118253338357548,
])


def _offset_dither(n: int) -> np.ndarray:
    if n <= _OFFSET_DITHER.size:
        return _OFFSET_DITHER[:n]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(0xD17E4)))
    return rng.uniform(0.25, 1.0, size=n) * 2.0**-12


def _random_labels(rng: np.random.Generator, radix: tuple, count: int) -> np.ndarray:
    cols = [rng.integers(0, r, size=count, dtype=np.int64) for r in radix]
    return np.stack(cols, axis=1)


def make_voronoi_code(pair: NestedLatticePair, q: int | None = None,
                      offset_mode: str = "half-basis",
                      offset=None, energy_norm: float | None = None) -> VoronoiCode:
    """Construct a VoronoiCode from a nested pair.

    offset_mode "half-basis" puts the offset at one half the sum of the
    coding-lattice basis vectors, which generically keeps constellation
    points off the shaping Voronoi boundary; "custom" uses `offset` as-is.
    """
    n = pair.dim
    radix = pair.snf_diag
    if any(r & (r - 1) for r in radix):
        raise ValueError(f"per-coordinate radices {radix} are not all powers of two")
    k = sum(r.bit_length() - 1 for r in radix)
    if k != pair.index_log2:
        raise AssertionError("bit budget mismatch against nesting index")
    m = pair.basis_change
    mode = "box" if not (m & 1).any() else "snf"
    hnf = None
    if mode == "box":
        hnf = hermite_diagonal_form(m)
        group_radix = tuple(int(v) for v in np.diagonal(hnf))
    else:
        group_radix = tuple(radix)
    if sum(r.bit_length() - 1 for r in group_radix) != k:
        raise AssertionError("group bit budget mismatch")
    q = n if q is None else q
    if not 0 < q <= n:
        raise ValueError("q must lie in [1, n] (one LSB per coordinate)")
    if any(r < 2 for r in group_radix[:q]):
        raise ValueError("coordinates carrying LRBs need radix >= 2")
    if offset_mode == "half-basis":
        # half-integer coefficients center the codebook; the tiny fixed
        # full-mantissa dithers break the exact arithmetic coincidences
        # that would otherwise put shipped-pair points on the shaping
        # Voronoi boundary (the boundary-tie counter stays zero, checked
        # empirically; structured dithers like arithmetic sequences cancel
        # through the shaping basis and do not work)
        coeff = 0.5 + _offset_dither(n)
        off = coeff @ pair.coding.basis
    elif offset_mode == "custom":
        if offset is None:
            raise ValueError("custom offset mode needs an offset vector")
        off = np.asarray(offset, dtype=np.float64)
        if off.shape != (n,):
            raise ValueError("offset has wrong dimension")
    else:
        raise ValueError(f"unknown offset mode {offset_mode!r}")
    code = VoronoiCode(pair=pair, offset=off, k=k, q=q, radix=tuple(radix),
                       group_radix=group_radix, label_mode=mode, energy_norm=1.0,
                       _hnf=hnf)
    if energy_norm is None:
        key = (pair.coding.name, pair.shaping.name, k)
        raw = _ENERGY_CACHE.get(key)
        if raw is None:
            raw = code.calibrate_energy()
        # scale so the mean energy per 2-D equals 1
        energy_norm = math.sqrt((n / 2.0) / raw)
    return VoronoiCode(pair=pair, offset=off, k=k, q=q, radix=tuple(radix),
                       group_radix=group_radix, label_mode=mode,
                       energy_norm=float(energy_norm), _hnf=hnf)


def vc_encode(code: VoronoiCode, bits) -> np.ndarray:
    """Map (..., k) bits to normalized constellation points (..., n)."""
    labels = code.bits_to_labels(np.asarray(bits))
    return code._encode_labels(labels) * code.energy_norm


def vc_decode(code: VoronoiCode, point) -> np.ndarray:
    """Inverse of vc_encode; arbitrary points decode to the nearest
    coding-lattice point first (after de-normalization and offset shift)."""
    y = np.asarray(point, dtype=np.float64) / code.energy_norm
    nearest = quantize(code.pair.coding, y + code.offset) - code.offset
    labels = code._point_to_labels(nearest)
    return code.labels_to_bits(labels)


def lrb_label(code: VoronoiCode, bits) -> np.ndarray:
    """The q least-reliable bits (LSB of each coordinate integer)."""
    bits = np.asarray(bits)
    if bits.shape[-1] != code.k:
        raise ValueError(f"expected {code.k} bits, got {bits.shape[-1]}")
    return bits[..., code.lrb_positions]


def constellation_stats(code: VoronoiCode, sample_count: int, seed: int = 0x5EED):
    """Monte-Carlo constellation statistics and 2-D projection samples.

    Returns the exact spectral efficiency (2k/n), the mean energy per 2-D
    estimated from uniform random labels, and the stacked (dim 2j, 2j+1)
    projection pairs for plotting.
    """
    if sample_count < 1000:
        raise ValueError("sample_count must be at least 1000")
    rng = np.random.default_rng(np.random.SeedSequence((seed, code.k, sample_count)))
    labels = _random_labels(rng, code.group_radix, sample_count)
    pts = code._encode_labels(labels) * code.energy_norm
    energy2d = float((pts**2).sum() / (sample_count * code.dim / 2.0))
    proj = pts.reshape(sample_count, code.dim // 2, 2).reshape(-1, 2)
    return {
        "se_bits_per_2d": code.spectral_efficiency,
        "mean_energy_per_2d": energy2d,
        "projection": proj,
    }
