"""Distribution matchers for probabilistic amplitude shaping.

Two block matchers map L uniform bits to N shaped amplitudes and back:

* CCDM: the 2^L lexicographically-first permutations of a fixed composition
  (constant-composition arithmetic coding with exact big-integer intervals,
  alphabet-ascending symbol order).
* ESS: lexicographic indexing of all amplitude sequences whose total energy
  stays within a maximum-energy sphere, via an exact suffix-count trellis.

All counting is exact integer arithmetic; no floats touch the encode or
decode paths, so encode/decode are bit-exact inverses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class CompositionViolation(ValueError):
    """Decoder input does not have the matcher's composition."""


class EnergyViolation(ValueError):
    """Decoder input exceeds the matcher's maximum energy."""


class IndexRangeError(ValueError):
    """Decoded sequence index does not fit in the L-bit input space."""


def default_alphabet(m: int) -> tuple:
    """Amplitude alphabet of 2^m-ary PAM: {1, 3, ..., 2^m - 1}."""
    return tuple(range(1, 2**m, 2))


# ---------------------------------------------------------------------------
# Compositions and CCDM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Composition:
    """A constant composition: amplitude alphabet plus per-amplitude counts."""

    alphabet: tuple
    counts: tuple
    bits_in: int  # L

    def __post_init__(self):
        if len(self.alphabet) != len(self.counts):
            raise ValueError("alphabet/counts length mismatch")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")
        if self.bits_in < 0:
            raise ValueError("negative input length")
        if self.bits_in > 0 and multinomial_count(self) < (1 << self.bits_in):
            raise ValueError("composition cannot carry that many input bits")

    @property
    def block_len(self) -> int:
        return sum(self.counts)

    @property
    def shaping_rate(self) -> float:
        return self.bits_in / self.block_len

    def type_entropy_bits(self) -> float:
        """Entropy (bits/amplitude) of the empirical type counts/N."""
        n = self.block_len
        h = 0.0
        for c in self.counts:
            if c:
                p = c / n
                h -= p * math.log2(p)
        return h

    def mean_energy(self) -> float:
        n = self.block_len
        return sum(c * a * a for a, c in zip(self.alphabet, self.counts)) / n


def multinomial_count(comp: Composition) -> int:
    """Exact number of distinct permutations of the composition."""
    total = math.factorial(comp.block_len)
    for c in comp.counts:
        total //= math.factorial(c)
    return total


def _bits_to_int(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _int_to_bits(value: int, width: int) -> np.ndarray:
    if value < 0 or value >> width:
        raise IndexRangeError(f"index {value} does not fit in {width} bits")
    out = np.zeros(width, dtype=np.uint8)
    for i in range(width - 1, -1, -1):
        out[i] = value & 1
        value >>= 1
    return out


def ccdm_encode(comp: Composition, bits) -> np.ndarray:
    """L bits -> the index-th permutation of the composition in lex order."""
    bits = np.asarray(bits)
    if bits.size != comp.bits_in:
        raise ValueError(f"expected {comp.bits_in} bits, got {bits.size}")
    index = _bits_to_int(bits.ravel())
    counts = list(comp.counts)
    remaining = comp.block_len
    total = multinomial_count(comp)
    out = np.empty(comp.block_len, dtype=np.int64)
    for pos in range(comp.block_len):
        for sym, c in enumerate(counts):
            if c == 0:
                continue
            ways = total * c // remaining
            if index < ways:
                out[pos] = comp.alphabet[sym]
                counts[sym] -= 1
                total = ways
                remaining -= 1
                break
            index -= ways
        else:  # pragma: no cover - index < multinomial by construction
            raise AssertionError("ran out of symbols during encoding")
    return out


def ccdm_decode(comp: Composition, seq) -> np.ndarray:
    """Rank the sequence in lex order; errors on type or range violations."""
    seq = np.asarray(seq)
    if seq.size != comp.block_len:
        raise CompositionViolation(
            f"sequence length {seq.size} != block length {comp.block_len}")
    sym_index = {a: i for i, a in enumerate(comp.alphabet)}
    counts = list(comp.counts)
    remaining = comp.block_len
    total = multinomial_count(comp)
    index = 0
    for v in seq.ravel():
        s = sym_index.get(int(v))
        if s is None or counts[s] == 0:
            raise CompositionViolation(f"symbol {v} violates the composition")
        for t in range(s):
            if counts[t]:
                index += total * counts[t] // remaining
        total = total * counts[s] // remaining
        counts[s] -= 1
        remaining -= 1
    return _int_to_bits(index, comp.bits_in)


def select_composition(alphabet, n: int, target_rs: float) -> Composition:
    """Minimum-energy integer composition achieving shaping rate L/N.

    L = round(N * target_rs).  Candidate types come from quantizing the
    Maxwell-Boltzmann family P(a) proportional to exp(-lambda a^2) over a
    lambda grid (largest-remainder rounding); the feasible candidate with
    the smallest average energy wins.
    """
    alphabet = tuple(alphabet)
    bits = round(n * target_rs)
    if bits < 0:
        raise ValueError("negative shaping rate")
    if target_rs > math.log2(len(alphabet)):
        raise ValueError(
            f"shaping rate {target_rs} above log2(|alphabet|) = {math.log2(len(alphabet)):.4g}")
    best: Composition | None = None
    best_energy = math.inf
    target = 1 << bits
    for lam in _lambda_grid():
        counts = _quantize_mb(alphabet, n, lam)
        comp_counts = tuple(counts)
        total = _multinomial_of(comp_counts)
        if total >= target:
            energy = sum(c * a * a for a, c in zip(alphabet, comp_counts))
            if energy < best_energy:
                best_energy = energy
                best = Composition(alphabet, comp_counts, bits)
    if best is None:
        raise ValueError(
            f"no composition of length {n} over {alphabet} reaches {bits} bits")
    return best


def _multinomial_of(counts) -> int:
    total = math.factorial(sum(counts))
    for c in counts:
        total //= math.factorial(c)
    return total


def _lambda_grid():
    yield 0.0
    lam = 1e-4
    while lam < 60.0:
        yield lam
        lam *= 1.05
    yield 60.0


def _quantize_mb(alphabet, n: int, lam: float) -> list[int]:
    weights = [math.exp(-lam * a * a) for a in alphabet]
    z = sum(weights)
    ideal = [n * w / z for w in weights]
    counts = [int(math.floor(x)) for x in ideal]
    rem = n - sum(counts)
    frac = sorted(range(len(alphabet)), key=lambda i: ideal[i] - counts[i], reverse=True)
    for i in frac[:rem]:
        counts[i] += 1
    return counts


# ---------------------------------------------------------------------------
# Enumerative sphere shaping
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EnergyTrellis:
    """Exact suffix counts T(i, e): number of length-(N-i) amplitude
    suffixes with energy at most e.

    Energies of odd amplitudes are 1 mod 8, so budgets live on the grid
    e = (N - i) + 8 * level; rows are stored on that grid.
    """

    alphabet: tuple
    block_len: int
    e_max: int
    rows: tuple  # rows[i][level] = T(i, (N - i) + 8 * level)

    @property
    def levels(self) -> int:
        return (self.e_max - self.block_len) // 8

    def count(self, i: int, e: int) -> int:
        """T(i, e) for arbitrary integer budget e."""
        min_e = self.block_len - i
        if e < min_e:
            return 0
        level = (e - min_e) // 8
        row = self.rows[i]
        if level >= len(row):
            level = len(row) - 1
        return row[level]

    @property
    def total(self) -> int:
        return self.rows[0][-1]


def build_trellis(alphabet, n: int, e_max: int) -> EnergyTrellis:
    alphabet = tuple(sorted(alphabet))
    if any(a % 2 == 0 or a < 1 for a in alphabet):
        raise ValueError("amplitudes must be positive odd integers")
    if e_max < n:
        raise ValueError("maximum energy below the all-ones sequence energy")
    e_max = n + 8 * ((e_max - n) // 8)  # snap down to the achievable grid
    levels = (e_max - n) // 8 + 1
    steps = [(a * a - 1) // 8 for a in alphabet]
    rows: list[list[int]] = [[0] * levels for _ in range(n + 1)]
    rows[n] = [1] * levels
    for i in range(n - 1, -1, -1):
        nxt = rows[i + 1]
        cur = rows[i]
        for lv in range(levels):
            acc = 0
            for st in steps:
                j = lv - st
                if j >= 0:
                    acc += nxt[j]
            cur[lv] = acc
    return EnergyTrellis(alphabet=alphabet, block_len=n, e_max=e_max,
                         rows=tuple(tuple(r) for r in rows))


def select_emax(alphabet, n: int, bits: int) -> int:
    """Smallest maximum energy whose sphere holds at least 2^bits sequences."""
    alphabet = tuple(sorted(alphabet))
    if bits < 0:
        raise ValueError("negative input length")
    if bits > n * math.log2(len(alphabet)):
        raise ValueError(f"{bits} bits infeasible for N={n} over {alphabet}")
    target = 1 << bits
    cap = n + 8 * max(1, n // 2)
    hard_cap = n * max(a * a for a in alphabet)
    while True:
        trellis = build_trellis(alphabet, n, min(cap, hard_cap))
        row0 = trellis.rows[0]
        if row0[-1] >= target:
            for lv, cnt in enumerate(row0):
                if cnt >= target:
                    return n + 8 * lv
        if cap >= hard_cap:
            raise ValueError("energy cap exhausted; bits infeasible")
        cap *= 2


@dataclass(frozen=True, eq=False)
class EssShaper:
    """Bounded-energy enumerative matcher with L input bits."""

    trellis: EnergyTrellis
    bits_in: int

    @property
    def alphabet(self) -> tuple:
        return self.trellis.alphabet

    @property
    def block_len(self) -> int:
        return self.trellis.block_len

    @property
    def e_max(self) -> int:
        return self.trellis.e_max

    @property
    def shaping_rate(self) -> float:
        return self.bits_in / self.block_len


def make_ess(alphabet, n: int, bits: int, e_max: int | None = None) -> EssShaper:
    if e_max is None:
        e_max = select_emax(alphabet, n, bits)
    trellis = build_trellis(alphabet, n, e_max)
    if trellis.total < (1 << bits):
        raise ValueError("trellis too small for the input length")
    return EssShaper(trellis=trellis, bits_in=bits)


def ess_encode(shaper: EssShaper, bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.size != shaper.bits_in:
        raise ValueError(f"expected {shaper.bits_in} bits, got {bits.size}")
    index = _bits_to_int(bits.ravel())
    tr = shaper.trellis
    n = tr.block_len
    budget = tr.e_max
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        for a in tr.alphabet:
            ways = tr.count(i + 1, budget - a * a)
            if index < ways:
                out[i] = a
                budget -= a * a
                break
            index -= ways
        else:  # pragma: no cover - index < total by construction
            raise AssertionError("ran out of amplitudes during encoding")
    return out


def ess_decode(shaper: EssShaper, seq) -> np.ndarray:
    seq = np.asarray(seq)
    tr = shaper.trellis
    if seq.size != tr.block_len:
        raise EnergyViolation(f"sequence length {seq.size} != {tr.block_len}")
    energy = int((seq.astype(np.int64) ** 2).sum())
    if energy > tr.e_max:
        raise EnergyViolation(f"sequence energy {energy} exceeds E_max {tr.e_max}")
    index = 0
    budget = tr.e_max
    for i, v in enumerate(seq.ravel()):
        v = int(v)
        if v not in tr.alphabet:
            raise EnergyViolation(f"symbol {v} outside the alphabet")
        for a in tr.alphabet:
            if a == v:
                break
            index += tr.count(i + 1, budget - a * a)
        budget -= v * v
    return _int_to_bits(index, shaper.bits_in)


# ---------------------------------------------------------------------------
# Rate loss
# ---------------------------------------------------------------------------

def rate_loss(shaper, sample_blocks: int = 200, seed: int = 0xE55) -> float:
    """Entropy of the induced amplitude marginal minus L/N, in bits/1-D.

    For a CCDM composition the marginal is the exact type; for ESS it is
    estimated by encoding `sample_blocks` random inputs (fixed seed).
    """
    if isinstance(shaper, Composition):
        return shaper.type_entropy_bits() - shaper.shaping_rate
    if isinstance(shaper, EssShaper):
        rng = np.random.default_rng(np.random.SeedSequence((seed, shaper.bits_in)))
        hist: dict[int, int] = {a: 0 for a in shaper.alphabet}
        for _ in range(sample_blocks):
            bits = rng.integers(0, 2, size=shaper.bits_in)
            for a in ess_encode(shaper, bits):
                hist[int(a)] += 1
        total = sum(hist.values())
        h = 0.0
        for c in hist.values():
            if c:
                p = c / total
                h -= p * math.log2(p)
        return h - shaper.shaping_rate
    raise TypeError(f"unsupported shaper type {type(shaper)!r}")
