"""Lattice definitions, exact closest-point quantizers, and integer machinery.

Shipped lattices with exact decoders: Z^n, D_n, E8, and the 24-D Leech
lattice Lambda24 (plus arbitrary scaled copies of each).  The Leech lattice
is stored as its integer-coordinate generator (minimum squared norm 32,
determinant 2^36) together with ``scale_sq = 1/8``, so the effective lattice
is the unimodular scaling: |det| = 1, minimum squared norm 4.  Keeping the
scale as its *square* keeps every stored quantity rational.

The quantizers return the true argmin-distance lattice point; ties are
broken deterministically (lexicographically smallest point for the
coordinate-wise decoders).  ``brute_force_quantize`` is the independent
enumeration oracle used by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np


class NoExactDecoderError(ValueError):
    """Raised when a lattice has no exact closest-point decoder."""


class EnumerationError(ValueError):
    """Raised when brute-force enumeration cannot guarantee a result."""


def _round_half_down(x: np.ndarray) -> np.ndarray:
    """Nearest integer, exact .5 ties toward -inf (lexicographic tie rule)."""
    return np.ceil(x - 0.5)


# ---------------------------------------------------------------------------
# Binary Golay code (24, 12, 8)
# ---------------------------------------------------------------------------

# Generator polynomial of the (23, 12) quadratic-residue Golay code,
# coefficients in ascending degree: x^11 + x^10 + x^6 + x^5 + x^4 + x^2 + 1.
_GOLAY_POLY = (1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1)


def _poly_divides_x23_plus_1() -> bool:
    rem = [0] * 24
    rem[0] = 1
    rem[23] = 1
    for deg in range(23, 10, -1):
        if rem[deg]:
            for i, c in enumerate(_GOLAY_POLY):
                rem[deg - 11 + i] ^= c
    return not any(rem)


@lru_cache(maxsize=1)
def golay_generator() -> np.ndarray:
    """12x24 generator of the extended binary Golay code (cyclic + parity)."""
    if not _poly_divides_x23_plus_1():
        raise AssertionError("Golay generator polynomial does not divide x^23 - 1")
    rows = np.zeros((12, 24), dtype=np.uint8)
    for i in range(12):
        rows[i, i : i + 12] = _GOLAY_POLY
    rows[:, 23] = rows[:, :23].sum(axis=1) % 2
    return rows


@lru_cache(maxsize=1)
def golay_codewords() -> np.ndarray:
    """All 4096 codewords as a (4096, 24) uint8 array, index = message."""
    gen = golay_generator()
    msgs = ((np.arange(4096)[:, None] >> np.arange(12)[None, :]) & 1).astype(np.uint8)
    return (msgs @ gen) % 2


# ---------------------------------------------------------------------------
# Integer matrix helpers
# ---------------------------------------------------------------------------

def _int_det(mat) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    a = [[int(v) for v in row] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _fraction_det(rows) -> Fraction:
    a = [[Fraction(v) for v in r] for r in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return det


def _hermite_form(gen_rows: list[list[int]], n: int) -> list[list[int]]:
    """Row-lattice Hermite normal form of a (possibly redundant) generating
    set; returns n lower-triangular-ordered basis rows with positive pivots."""
    rows = [list(map(int, r)) for r in gen_rows if any(r)]
    basis: list[list[int]] = []
    for col in range(n):
        work = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0 and any(r)]
        if not work:
            raise ValueError("generating set does not span the space")
        # gcd-reduce the column to a single pivot row; terminates because the
        # largest |column entry| strictly decreases every pass
        while len(work) > 1:
            work.sort(key=lambda r: abs(r[col]))
            p = work[0]
            new_work = [p]
            for r in work[1:]:
                q = r[col] // p[col]
                nr = [a - q * b for a, b in zip(r, p)]
                if nr[col] != 0:
                    new_work.append(nr)
                elif any(nr):
                    rest.append(nr)
            work = new_work
        p = work[0]
        if p[col] < 0:
            p = [-v for v in p]
        basis.append(p)
        rows = rest
    # canonical: entries above each pivot reduced mod the pivot
    for i in range(n - 1, -1, -1):
        for j in range(i):
            q = basis[j][i] // basis[i][i]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], basis[i])]
    return basis


# ---------------------------------------------------------------------------
# Leech lattice in integer coordinates
# ---------------------------------------------------------------------------

def leech_contains_scaled(x) -> bool:
    """Membership test in integer-Leech coordinates (min norm^2 = 32).

    x belongs iff all coordinates share a parity m, the mod-2 reduction of
    (x - m)/2 is a Golay codeword, and sum(x) = 4m (mod 8).
    """
    x = [int(v) for v in np.asarray(x).ravel()]
    if len(x) != 24:
        return False
    m = x[0] & 1
    if any((v & 1) != m for v in x):
        return False
    tbit = np.array([((v - m) // 2) & 1 for v in x], dtype=np.uint8)
    # self-dual code: the generator doubles as a parity check
    if ((golay_generator() @ tbit) % 2).any():
        return False
    return sum(x) % 8 == (4 * m) % 8


@lru_cache(maxsize=1)
def leech_generator_int() -> np.ndarray:
    """24x24 integer Leech generator (rows are basis vectors), |det| = 2^36."""
    gen_rows: list[list[int]] = []
    row = [0] * 24
    row[0] = 8
    gen_rows.append(row)
    for i in range(1, 24):
        row = [0] * 24
        row[0] = 4
        row[i] = 4
        gen_rows.append(row)
    for c in golay_generator():
        gen_rows.append([2 * int(v) for v in c])
    gen_rows.append([-3] + [1] * 23)
    basis = _hermite_form(gen_rows, 24)
    det = _int_det(basis)
    if abs(det) != 2**36:
        raise AssertionError(f"Leech basis determinant {det} != 2^36")
    for r in basis:
        if not leech_contains_scaled(r):
            raise AssertionError("Leech basis row fails membership")
    return np.array(basis, dtype=np.int64)


# ---------------------------------------------------------------------------
# Batched Leech closest-point decoder (Golay coset decomposition)
# ---------------------------------------------------------------------------

_LEECH_CHUNK = 256


def _leech_precompute(y: np.ndarray, m: int):
    """Per-coordinate decode statistics for the parity-m half of the lattice."""
    w = (y - m) * 0.5
    t0 = 2.0 * _round_half_down(0.5 * w)
    t1 = 1.0 + 2.0 * _round_half_down(0.5 * (w - 1.0))
    e0 = w - t0
    e1 = w - t1
    s0 = np.where(e0 > 0, 2.0, -2.0)
    s1 = np.where(e1 > 0, 2.0, -2.0)
    return {
        "t": (t0, t1),
        "e": (e0, e1),
        "s": (s0, s1),
        "cost": (e0 * e0, e1 * e1),
        "delta": (4.0 - 2.0 * e0 * s0, 4.0 - 2.0 * e1 * s1),
        "zpar": (np.mod(t0 * 0.5, 2.0), np.mod((t1 - 1.0) * 0.5, 2.0)),
    }


def _sparse_fix(gu: np.ndarray, pre: dict, rows: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """Exact cheapest parity fix-up for (codeword row, query) pairs."""
    d0, d1 = pre["delta"]
    gsel = gu[rows].astype(np.float64)
    dsel = d0[qs] * (1.0 - gsel) + d1[qs] * gsel
    return dsel.min(axis=1)


@lru_cache(maxsize=1)
def _leech_gft32() -> np.ndarray:
    return np.ascontiguousarray(golay_codewords().astype(np.float32).T)


def _exact_costs(gu: np.ndarray, pre: dict, need: np.ndarray,
                 rows: np.ndarray, qs: np.ndarray):
    """Exact float64 coset costs (including parity fix) for candidate pairs."""
    c0, c1 = pre["cost"]
    gsel = gu[rows]
    dc = (c1 - c0)[qs]
    total = c0.sum(axis=1)[qs] + (dc * gsel).sum(axis=1)
    fixed = np.asarray(need[qs, rows])
    if fixed.any():
        total[fixed] += _sparse_fix(gu, pre, rows[fixed], qs[fixed])
    return total, fixed


# float32 screening margin: float32 cost error is < 1e-4 absolute here
# (costs are bounded by 28 in the half-coordinate domain), so candidates
# within this margin of the screened minimum provably contain the argmin
_SCREEN_MARGIN = np.float32(1e-2)


def _leech_quantize_chunk(y: np.ndarray, collect_ties: bool):
    gu = golay_codewords()
    gft32 = _leech_gft32()
    b = y.shape[0]

    pres = []
    screens = []
    best_cost = np.full(b, np.inf)
    best_row = np.zeros(b, dtype=np.int64)
    best_m = np.zeros(b, dtype=np.int64)
    best_fix = np.zeros(b, dtype=bool)

    for m in (0, 1):
        pre = _leech_precompute(y, m)
        c0, c1 = pre["cost"]
        z0, z1 = pre["zpar"]
        rhs = np.concatenate([c1 - c0, z1 - z0], axis=0).astype(np.float32)
        both = rhs @ gft32  # (2B, 4096) float32
        total32 = both[:b]
        total32 += c0.sum(axis=1).astype(np.float32)[:, None]
        parsum = both[b:]
        parsum += z0.sum(axis=1).astype(np.float32)[:, None]
        need = np.mod(parsum, 2.0) != m  # exact: small-integer float32 sums
        pres.append(pre)
        screens.append((total32, need))

        nofix_min = np.where(need, np.float32(np.inf), total32).min(axis=1)
        qs, rows = np.nonzero(total32 <= (nofix_min + _SCREEN_MARGIN)[:, None])
        cost, fixed_flags = _exact_costs(gu, pre, need, rows, qs)
        order = np.lexsort((rows, cost, qs))
        qs_o = qs[order]
        keep = np.ones(order.size, dtype=bool)
        keep[1:] = qs_o[1:] != qs_o[:-1]
        sel = order[keep]
        qq = qs[sel]
        better = cost[sel] < best_cost[qq]
        upd = qq[better]
        best_cost[upd] = cost[sel][better]
        best_row[upd] = rows[sel][better]
        best_m[upd] = m
        best_fix[upd] = fixed_flags[sel][better]

    points = np.empty_like(y)
    tie_flags = np.zeros(b, dtype=bool)
    for m in (0, 1):
        idx = np.nonzero(best_m == m)[0]
        if idx.size == 0:
            continue
        pts_m, fix_ties = _reconstruct_coset_points(
            gu, pres[m], m, best_row[idx], idx, best_fix[idx], collect_ties)
        points[idx] = pts_m
        if collect_ties:
            tie_flags[idx] |= fix_ties

    if collect_ties:
        # exact tie sweep: a coset can tie the winner only if its screened
        # cost is within the float32 margin of the winning cost
        for m in (0, 1):
            pre = pres[m]
            total32, need = screens[m]
            thresh = (best_cost + float(_SCREEN_MARGIN)).astype(np.float32)
            qs, rows = np.nonzero(total32 <= thresh[:, None])
            if rows.size == 0:
                continue
            cost, _ = _exact_costs(gu, pre, need, rows, qs)
            eq = cost == best_cost[qs]
            if eq.any():
                counts = np.bincount(qs[eq], minlength=b)
                tie_flags |= counts > 1
        # coordinate rounding ties in the winning coset
        for m in (0, 1):
            idx = np.nonzero(best_m == m)[0]
            if idx.size == 0:
                continue
            e0, e1 = pres[m]["e"]
            c = gu[best_row[idx]].astype(bool)
            esel = np.where(c, e1[idx], e0[idx])
            tie_flags[idx] |= (np.abs(esel) == 1.0).any(axis=1)
    return points, tie_flags


def _reconstruct_coset_points(gu: np.ndarray, pre: dict, m: int,
                              rows: np.ndarray, qs: np.ndarray,
                              fixed: np.ndarray, collect_ties: bool = False):
    """Optimal points of the (m, codeword-row) cosets for (row, query)
    pairs, applying the single cheapest parity fix where flagged."""
    t0, t1 = pre["t"]
    d0, d1 = pre["delta"]
    s0, s1 = pre["s"]
    c = gu[rows].astype(bool)
    t = np.where(c, t1[qs], t0[qs])
    tie_flags = np.zeros(len(qs), dtype=bool) if collect_ties else None
    fsel = np.nonzero(fixed)[0]
    if fsel.size:
        qf = qs[fsel]
        dmat = np.where(c[fsel], d1[qf], d0[qf])
        smat = np.where(c[fsel], s1[qf], s0[qf])
        kk = np.argmin(dmat, axis=1)
        t[fsel, kk] += smat[np.arange(fsel.size), kk]
        if collect_ties:
            mins = dmat[np.arange(fsel.size), kk]
            tie_flags[fsel] = (dmat == mins[:, None]).sum(axis=1) > 1
    return m + 2.0 * t, tie_flags


def leech_coset_list_int(y: np.ndarray, k: int):
    """Per query, the k best coset-optimal Leech points (integer coords).

    One optimum per (parity, Golay codeword) coset, ranked by exact
    distance over a float32-screened preselection; candidate-list quality
    suffices for soft metrics (the exact argmin contract lives in
    quantize).  Returns (points (B, k, 24), squared distances (B, k)).
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    b = y.shape[0]
    pts = np.empty((b, k, 24))
    costs = np.empty((b, k))
    for lo in range(0, b, _LEECH_CHUNK):
        p, cst = _leech_list_chunk(y[lo : lo + _LEECH_CHUNK], k)
        pts[lo : lo + _LEECH_CHUNK] = p
        costs[lo : lo + _LEECH_CHUNK] = cst
    return pts, costs


def _leech_list_chunk(y: np.ndarray, k: int):
    gu = golay_codewords()
    gft32 = _leech_gft32()
    b = y.shape[0]
    pre_k = min(4096, k + 16)
    all_costs = []
    all_rows = []
    all_fixed = []
    pres = []
    for m in (0, 1):
        pre = _leech_precompute(y, m)
        c0, c1 = pre["cost"]
        z0, z1 = pre["zpar"]
        rhs = np.concatenate([c1 - c0, z1 - z0], axis=0).astype(np.float32)
        both = rhs @ gft32
        total32 = both[:b] + c0.sum(axis=1).astype(np.float32)[:, None]
        parsum = both[b:] + z0.sum(axis=1).astype(np.float32)[:, None]
        need = np.mod(parsum, 2.0) != m
        pres.append(pre)
        sel = np.argpartition(total32, pre_k - 1, axis=1)[:, :pre_k]
        qs = np.repeat(np.arange(b), pre_k)
        rows = sel.ravel()
        cost, fixed = _exact_costs(gu, pre, need, rows, qs)
        all_costs.append(cost.reshape(b, pre_k))
        all_rows.append(sel)
        all_fixed.append(fixed.reshape(b, pre_k))
    costs = np.concatenate(all_costs, axis=1)  # (B, 2*pre_k)
    rows = np.concatenate(all_rows, axis=1)
    fixed = np.concatenate(all_fixed, axis=1)
    ms = np.concatenate([np.zeros((b, pre_k), dtype=np.int64),
                         np.ones((b, pre_k), dtype=np.int64)], axis=1)
    order = np.argsort(costs, axis=1, kind="stable")[:, :k]
    ar = np.arange(b)[:, None]
    top_cost = costs[ar, order]
    top_rows = rows[ar, order]
    top_fixed = fixed[ar, order]
    top_m = ms[ar, order]
    points = np.empty((b, k, 24))
    for m in (0, 1):
        qi, ki = np.nonzero(top_m == m)
        if qi.size == 0:
            continue
        p, _ = _reconstruct_coset_points(gu, pres[m], m, top_rows[qi, ki], qi,
                                         top_fixed[qi, ki])
        points[qi, ki] = p
    return points, top_cost


def _leech_quantize_int(y: np.ndarray, collect_ties: bool = False):
    """Closest Leech point in integer coordinates for a (..., 24) batch."""
    y = np.asarray(y, dtype=np.float64)
    squeeze = y.ndim == 1
    y2 = np.atleast_2d(y)
    out = np.empty_like(y2)
    ties = np.zeros(y2.shape[0], dtype=bool)
    for lo in range(0, y2.shape[0], _LEECH_CHUNK):
        pts, tf = _leech_quantize_chunk(y2[lo : lo + _LEECH_CHUNK], collect_ties)
        out[lo : lo + _LEECH_CHUNK] = pts
        ties[lo : lo + _LEECH_CHUNK] = tf
    if squeeze:
        return (out[0], bool(ties[0])) if collect_ties else out[0]
    return (out, ties) if collect_ties else out


# ---------------------------------------------------------------------------
# D_n / E8 decoders
# ---------------------------------------------------------------------------

def _dn_quantize(y: np.ndarray) -> np.ndarray:
    """Closest point of D_n (integer vectors with even coordinate sum)."""
    y = np.atleast_2d(y)
    f = _round_half_down(y)
    odd = np.mod(f.sum(axis=1), 2.0) != 0
    rows = np.nonzero(odd)[0]
    if rows.size:
        delta = y[rows] - f[rows]
        k = np.argmax(np.abs(delta), axis=1)
        d = delta[np.arange(rows.size), k]
        f[rows, k] += np.where(d > 0, 1.0, -1.0)
    return f


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise lexicographic a < b."""
    diff = a - b
    nz = diff != 0
    any_nz = nz.any(axis=1)
    first = np.argmax(nz, axis=1)
    out = np.zeros(a.shape[0], dtype=bool)
    rows = np.nonzero(any_nz)[0]
    out[rows] = diff[rows, first[rows]] < 0
    return out


def _e8_quantize(y: np.ndarray) -> np.ndarray:
    """Closest E8 point via the D8 union-of-cosets decomposition."""
    y = np.atleast_2d(y)
    q1 = _dn_quantize(y)
    q2 = _dn_quantize(y - 0.5) + 0.5
    d1 = ((y - q1) ** 2).sum(axis=1)
    d2 = ((y - q2) ** 2).sum(axis=1)
    pick2 = d2 < d1
    eq = d2 == d1
    if np.any(eq):
        pick2 = pick2 | (eq & _lex_less(q2, q1))
    return np.where(pick2[:, None], q2, q1)


# ---------------------------------------------------------------------------
# Lattice definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeDef:
    """A lattice given by a rational generator matrix and a squared scale.

    Rows of ``generator`` are basis vectors; the effective basis is
    ``sqrt(scale_sq) * generator``.  ``covering_radius_sq`` (effective,
    scaled) is documented per shipped family because the brute-force oracle
    needs it.
    """

    name: str
    dim: int
    generator: tuple  # tuple of tuples of Fraction
    scale_sq: Fraction = Fraction(1)
    family: str | None = None  # "Z", "D", "E8", "Leech", or None
    covering_radius_sq: Fraction | None = None
    min_norm_sq: Fraction | None = None

    @cached_property
    def basis(self) -> np.ndarray:
        g = np.array([[float(v) for v in row] for row in self.generator])
        return math.sqrt(float(self.scale_sq)) * g

    @cached_property
    def basis_inv(self) -> np.ndarray:
        return np.linalg.inv(self.basis)

    @property
    def _family_scale(self) -> float:
        return math.sqrt(float(self.scale_sq))

    def scaled(self, factor) -> "LatticeDef":
        """The lattice factor * self (factor rational, e.g. 8 * Lambda24)."""
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        cov = None if self.covering_radius_sq is None else self.covering_radius_sq * factor**2
        mn = None if self.min_norm_sq is None else self.min_norm_sq * factor**2
        return LatticeDef(
            name=f"{factor}*{self.name}",
            dim=self.dim,
            generator=self.generator,
            scale_sq=self.scale_sq * factor**2,
            family=self.family,
            covering_radius_sq=cov,
            min_norm_sq=mn,
        )

    def det_effective_sq(self) -> Fraction:
        """Exact squared determinant of the effective basis."""
        det = _fraction_det(self.generator)
        return det * det * self.scale_sq**self.dim


def _identity_fractions(n: int) -> tuple:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def get_lattice(name: str, scale=1) -> LatticeDef:
    """Built-in lattices: "Z<n>", "D<n>", "E8", "Lambda24" (alias "leech").

    `scale` returns the scaled copy scale * lattice.
    """
    low = name.strip().lower()
    if low.startswith("z") and low[1:].isdigit():
        n = int(low[1:])
        lat = LatticeDef(f"Z{n}", n, _identity_fractions(n), Fraction(1), "Z",
                         covering_radius_sq=Fraction(n, 4), min_norm_sq=Fraction(1))
    elif low.startswith("d") and low[1:].isdigit():
        n = int(low[1:])
        if n < 2:
            raise ValueError("D_n needs n >= 2")
        rows = [[Fraction(0)] * n for _ in range(n)]
        rows[0][0] = rows[0][1] = Fraction(1)
        for i in range(1, n):
            rows[i][i - 1], rows[i][i] = Fraction(-1), Fraction(1)
        lat = LatticeDef(f"D{n}", n, tuple(tuple(r) for r in rows), Fraction(1), "D",
                         covering_radius_sq=Fraction(max(4, n), 4), min_norm_sq=Fraction(2))
    elif low == "e8":
        rows = [[Fraction(0)] * 8 for _ in range(8)]
        rows[0][0] = Fraction(2)
        for i in range(1, 7):
            rows[i][i - 1], rows[i][i] = Fraction(-1), Fraction(1)
        rows[7] = [Fraction(1, 2)] * 8
        lat = LatticeDef("E8", 8, tuple(tuple(r) for r in rows), Fraction(1), "E8",
                         covering_radius_sq=Fraction(1), min_norm_sq=Fraction(2))
    elif low in ("lambda24", "leech", "leech24"):
        gen = tuple(tuple(Fraction(int(v)) for v in row) for row in leech_generator_int())
        lat = LatticeDef("Lambda24", 24, gen, Fraction(1, 8), "Leech",
                         covering_radius_sq=Fraction(2), min_norm_sq=Fraction(4))
    else:
        raise ValueError(f"unknown lattice name {name!r}")
    scale = Fraction(scale)
    return lat if scale == 1 else lat.scaled(scale)


def load_generator_file(path, name: str | None = None, scale_sq=1) -> LatticeDef:
    """Load a generator matrix from a plain-text file.

    One row per line; entries are integers or rationals written "p/q",
    whitespace separated.  '#' starts a comment.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            rows.append(tuple(Fraction(tok) for tok in line.split()))
    if not rows:
        raise ValueError(f"no matrix rows in {path}")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("generator matrix must be square")
    if _fraction_det(rows) == 0:
        raise ValueError("generator has zero determinant")
    return LatticeDef(name or str(path), n, tuple(rows), Fraction(scale_sq), None)


# ---------------------------------------------------------------------------
# Quantizers
# ---------------------------------------------------------------------------

def quantize(lattice: LatticeDef, y, collect_ties: bool = False):
    """Exact closest lattice point to y (a vector or a batch of rows).

    Raises NoExactDecoderError unless the lattice belongs to a shipped
    family.  With collect_ties=True additionally returns a boolean flag
    (per row) marking exact decision ties.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != lattice.dim:
        raise ValueError(f"dimension mismatch: expected {lattice.dim}, got {y.shape[-1]}")
    if lattice.family is None:
        raise NoExactDecoderError(f"no exact decoder for lattice {lattice.name!r}")
    s = lattice._family_scale
    w = y / s
    squeeze = w.ndim == 1
    ties = None
    if lattice.family == "Z":
        pts = _round_half_down(w)
        if collect_ties:
            ties = (np.abs(w - pts) == 0.5).any(axis=-1)
    elif lattice.family == "D":
        pts = _dn_quantize(w).reshape(w.shape)
        if collect_ties:
            ties = _tie_by_enumeration(lattice, y, pts * s)
    elif lattice.family == "E8":
        pts = _e8_quantize(w).reshape(w.shape)
        if collect_ties:
            ties = _tie_by_enumeration(lattice, y, pts * s)
    elif lattice.family == "Leech":
        flat = w.reshape(-1, 24)
        if collect_ties:
            p, tflat = _leech_quantize_int(flat, collect_ties=True)
            ties = tflat.reshape(w.shape[:-1])
        else:
            p = _leech_quantize_int(flat)
        pts = p.reshape(w.shape)
    elif lattice.family == "LeechW":
        # ||v B W - y|| = sqrt(8) ||v B - y W^T/8||: one Leech decode suffices
        wm = _w8_matrix().astype(np.float64)
        flat = w.reshape(-1, 24) @ wm.T / 8.0
        if collect_ties:
            p, tflat = _leech_quantize_int(flat, collect_ties=True)
            ties = tflat.reshape(w.shape[:-1])
        else:
            p = _leech_quantize_int(flat)
        pts = (p @ wm).reshape(w.shape)
    else:  # pragma: no cover
        raise NoExactDecoderError(f"no exact decoder for lattice {lattice.name!r}")
    out = pts * s
    if collect_ties:
        if squeeze and ties is not None and np.ndim(ties) > 0:
            ties = bool(np.asarray(ties).ravel()[0])
        return out, ties
    return out


def _tie_by_enumeration(lattice: LatticeDef, y, pts) -> np.ndarray:
    y2 = np.atleast_2d(np.asarray(y, dtype=np.float64))
    p2 = np.atleast_2d(np.asarray(pts))
    out = np.zeros(y2.shape[0], dtype=bool)
    for i in range(y2.shape[0]):
        d0 = float(((y2[i] - p2[i]) ** 2).sum())
        cands = enumerate_points(lattice, y2[i], math.sqrt(d0) + 1e-9)
        dists = ((cands - y2[i]) ** 2).sum(axis=1)
        out[i] = int((dists == dists.min()).sum()) > 1
    return out.reshape(np.asarray(y).shape[:-1])


def coset_point_list(lattice: LatticeDef, y, k: int):
    """Scale-aware wrapper around leech_coset_list_int (Leech family only)."""
    if lattice.family != "Leech":
        raise NoExactDecoderError("coset short lists ship for the Leech family only")
    s = lattice._family_scale
    y = np.asarray(y, dtype=np.float64)
    pts, costs = leech_coset_list_int(y / s, k)
    return pts * s, costs * (s * s)


def mod_lattice(pair_or_lattice, y):
    """Representative of y in the shaping Voronoi region: y - quantize(Ls, y)."""
    lat = pair_or_lattice.shaping if isinstance(pair_or_lattice, NestedLatticePair) else pair_or_lattice
    y = np.asarray(y, dtype=np.float64)
    return y - quantize(lat, y)


# ---------------------------------------------------------------------------
# Sphere enumeration (test oracle)
# ---------------------------------------------------------------------------

def enumerate_points(lattice: LatticeDef, y, radius: float) -> np.ndarray:
    """All lattice points within `radius` of y (complete by construction)."""
    return _enumerate_basis(lattice.basis, np.asarray(y, dtype=np.float64), radius)


_REDUCED_CACHE: dict[bytes, np.ndarray] = {}


def _reduced_copy(basis: np.ndarray) -> np.ndarray:
    """Size-reduced basis of the same lattice (enumeration preprocessing only)."""
    key = basis.tobytes()
    cached = _REDUCED_CACHE.get(key)
    if cached is not None:
        return cached
    red = _lll(basis.copy())
    _REDUCED_CACHE[key] = red
    return red


def _lll(b: np.ndarray, delta: float = 0.99) -> np.ndarray:
    """Floating-point LLL; used only to keep the enumeration tree small.
    The output spans the same lattice (all operations are unimodular)."""
    n = b.shape[0]
    def gso():
        ortho = b.copy()
        mu = np.zeros((n, n))
        norms = np.zeros(n)
        for i in range(n):
            for j in range(i):
                mu[i, j] = (b[i] @ ortho[j]) / norms[j]
                ortho[i] = ortho[i] - mu[i, j] * ortho[j]
            norms[i] = ortho[i] @ ortho[i]
        return mu, norms
    mu, norms = gso()
    k = 1
    guard = 0
    while k < n and guard < 100000:
        guard += 1
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] = b[k] - q * b[j]
                mu, norms = gso()
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            mu, norms = gso()
            k = max(k - 1, 1)
    return b


def _enumerate_basis(basis: np.ndarray, y: np.ndarray, radius: float,
                     shrink_to_greedy: bool = False) -> np.ndarray:
    basis = _reduced_copy(basis)
    n = basis.shape[0]
    gram = basis @ basis.T
    chol = np.linalg.cholesky(gram)  # lower triangular L with gram = L L^T
    center = np.linalg.solve(basis.T, y)
    shift = np.floor(center + 0.5)
    c = center - shift
    rsq = radius * radius + 1e-9
    if shrink_to_greedy:
        # nearest-plane upper bound; keeps every point at the true minimum
        # distance inside the shrunk ball, so argmin/tie sets are unchanged
        g = np.zeros(n)
        acc_d = 0.0
        for level in range(n - 1, -1, -1):
            acc = sum((g[i] - c[i]) * chol[i, level] for i in range(level + 1, n))
            ll = chol[level, level]
            mid = c[level] - acc / ll
            g[level] = math.floor(mid + 0.5)
            acc_d += ((g[level] - mid) * ll) ** 2
        rsq = min(rsq, acc_d + 1e-9)
    found: list[np.ndarray] = []
    v = np.zeros(n)

    def rec(level: int, dist: float):
        if level < 0:
            found.append(v.copy())
            return
        acc = 0.0
        for i in range(level + 1, n):
            acc += (v[i] - c[i]) * chol[i, level]
        ll = chol[level, level]
        mid = c[level] - acc / ll
        span = math.sqrt(max(rsq - dist, 0.0)) / abs(ll)
        lo = math.ceil(mid - span)
        hi = math.floor(mid + span)
        for cand in range(lo, hi + 1):
            term = (cand - mid) * ll
            add = term * term
            if add <= rsq - dist:
                v[level] = cand
                rec(level - 1, dist + add)
        v[level] = 0.0

    rec(n - 1, 0.0)
    if not found:
        return np.empty((0, n))
    return (np.array(found) + shift) @ basis


def brute_force_quantize(lattice: LatticeDef, y, radius: float) -> np.ndarray:
    """Exhaustive-enumeration nearest point (test oracle).

    `radius` must be at least the lattice covering radius so a candidate is
    guaranteed; ties break to the lexicographically smallest point.
    """
    y = np.asarray(y, dtype=np.float64)
    if lattice.covering_radius_sq is not None:
        if radius * radius < float(lattice.covering_radius_sq) - 1e-9:
            raise EnumerationError(
                f"radius {radius} below covering radius "
                f"{math.sqrt(float(lattice.covering_radius_sq)):.6g} of {lattice.name}")
    pts = _enumerate_basis(lattice.basis, y, radius, shrink_to_greedy=True)
    if pts.shape[0] == 0:
        raise EnumerationError("no lattice point within radius; radius too small")
    d = ((pts - y) ** 2).sum(axis=1)
    cand = pts[d == d.min()]
    order = np.lexsort(cand.T[::-1])
    return cand[order[0]]


# ---------------------------------------------------------------------------
# Smith normal form and nested pairs
# ---------------------------------------------------------------------------

def _snf_exact(mat: list[list[int]]) -> tuple[list, list, list]:
    """Exact SNF as Python-int lists: U M V = D (no overflow anywhere)."""
    n = len(mat)
    # diagonal fast path (covers the shipped self-similar pairs)
    if all(mat[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        diag = [abs(mat[i][i]) for i in range(n)]
        if diag == sorted(diag) and all(diag[i + 1] % diag[i] == 0 for i in range(n - 1)):
            u = [[int(i == j) * (-1 if mat[i][i] < 0 else 1) for j in range(n)]
                 for i in range(n)]
            d = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
            v = [[int(i == j) for j in range(n)] for i in range(n)]
            return u, d, v
    from sympy.polys.domains import ZZ
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.matrices.normalforms import smith_normal_decomp

    dm = DomainMatrix([[ZZ(v) for v in row] for row in mat], (n, n), ZZ)
    d, u, v = smith_normal_decomp(dm)
    U = [[int(x) for x in row] for row in u.to_list()]
    V = [[int(x) for x in row] for row in v.to_list()]
    D = [[int(x) for x in row] for row in d.to_list()]
    for i in range(n):
        if D[i][i] < 0:
            U[i] = [-x for x in U[i]]
            D[i][i] = -D[i][i]
    return U, D, V


def smith_normal_form(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact Smith normal form of a nonsingular integer matrix.

    Returns (U, D, V) with U @ M @ V = D, U and V unimodular, and D diagonal
    with positive entries each dividing the next.
    """
    mat = [[int(v) for v in row] for row in np.asarray(m)]
    n = len(mat)
    if any(len(r) != n for r in mat):
        raise ValueError("matrix must be square")
    if _int_det(mat) == 0:
        raise ValueError("matrix is singular")
    u, d, v = _snf_exact(mat)
    return (np.array(u, dtype=np.int64), np.array(d, dtype=np.int64),
            np.array(v, dtype=np.int64))


def _int_inverse_unimodular_list(v: list[list[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix (Fraction elimination)."""
    n = len(v)
    a = [[Fraction(int(v[i][j])) for j in range(n)] +
         [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = next(i for i in range(k, n) if a[i][k] != 0)
        a[k], a[piv] = a[piv], a[k]
        inv = 1 / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    for row in out:
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def hermite_diagonal_form(m_int) -> np.ndarray:
    """Triangular HNF (rows; zeros left of each pivot) of an integer basis."""
    n = len(np.asarray(m_int))
    h = _hermite_form([[int(v) for v in r] for r in np.asarray(m_int)], n)
    return _to_int64("hermite form", h)


def reduce_to_hnf_box(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Reduce coefficient rows into the HNF fundamental box.

    The box {u : 0 <= u_j < H_jj} is a transversal of Z^n modulo the row
    lattice of H; since H[j] has zeros left of column j, an ascending sweep
    settles each coordinate without disturbing earlier ones.  Vectorized
    over rows of u.
    """
    u = np.array(u, dtype=np.int64, copy=True)
    single = u.ndim == 1
    u2 = np.atleast_2d(u)
    hd = np.diagonal(h)
    for j in range(h.shape[0]):
        q = np.floor_divide(u2[:, j], hd[j])
        nz = q != 0
        if nz.any():
            u2[nz] -= q[nz, None] * h[j][None, :]
    return u2[0] if single else u2


def _reduce_rows_mod_lattice(rows: list[list[int]], m_int) -> list[list[int]]:
    """Exactly reduce each row modulo the row lattice of m_int via its
    triangular Hermite form (any representative is equivalent for
    quotient-label purposes; this keeps entries small)."""
    n = len(rows[0])
    h = _hermite_form([[int(v) for v in r] for r in np.asarray(m_int)], n)
    out = []
    for r in rows:
        r = [int(x) for x in r]
        for j in range(n):
            q = r[j] // h[j][j]
            if q:
                r = [a - q * b for a, b in zip(r, h[j])]
        out.append(r)
    return out


def _frac_sqrt(x: Fraction) -> Fraction:
    num = math.isqrt(x.numerator)
    den = math.isqrt(x.denominator)
    if num * num != x.numerator or den * den != x.denominator:
        raise ValueError(f"{x} is not a rational square")
    return Fraction(num, den)


@dataclass(frozen=True, eq=False)
class NestedLatticePair:
    """A nested pair (coding lattice, shaping sublattice) with the integer
    quotient structure from the Smith normal form of the basis change."""

    coding: LatticeDef
    shaping: LatticeDef
    basis_change: np.ndarray = field(repr=False, default=None)
    index_log2: int = 0
    snf_diag: tuple = ()
    snf_u: np.ndarray = field(repr=False, default=None)
    snf_v: np.ndarray = field(repr=False, default=None)
    snf_v_inv: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.coding.dim


def nested_pair(coding: LatticeDef, shaping: LatticeDef) -> NestedLatticePair:
    """Build a NestedLatticePair, verifying nesting exactly in rationals."""
    if coding.dim != shaping.dim:
        raise ValueError("dimension mismatch")
    r = _frac_sqrt(shaping.scale_sq / coding.scale_sq)
    gc_f = np.array([[float(v) for v in row] for row in coding.generator])
    gs_f = np.array([[float(v) for v in row] for row in shaping.generator])
    m_float = float(r) * gs_f @ np.linalg.inv(gc_f)
    m_int = np.rint(m_float).astype(np.int64)
    if not _verify_basis_change(m_int, coding, shaping, r):
        raise ValueError("shaping lattice is not nested in the coding lattice")
    det = abs(_int_det(m_int))
    k = det.bit_length() - 1
    if det != 1 << k:
        raise ValueError(f"nesting index {det} is not a power of two")
    u, d, v, v_inv = snf_label_transforms(m_int)
    return NestedLatticePair(
        coding=coding, shaping=shaping, basis_change=m_int,
        index_log2=k, snf_diag=tuple(int(d[i, i]) for i in range(len(d))),
        snf_u=u, snf_v=v, snf_v_inv=v_inv)


def snf_label_transforms(m_int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """SNF of a basis change with transforms reduced for label arithmetic.

    V columns are reduced modulo the corresponding diagonal entry (labels
    are computed mod D) and the rows of V^-1 modulo the row lattice of M
    (coefficients only matter modulo that lattice), so every entry stays
    machine-int sized even when the raw SNF transforms blow up.
    """
    mat = [[int(v) for v in row] for row in np.asarray(m_int)]
    n = len(mat)
    u, d, v = _snf_exact(mat)
    v_inv = _int_inverse_unimodular_list(v)
    diag = [d[i][i] for i in range(n)]
    v_red = [[v[i][j] % diag[j] for j in range(n)] for i in range(n)]
    v_inv_red = _reduce_rows_mod_lattice(v_inv, mat)
    u_arr = _to_int64("snf U", u)
    d_arr = _to_int64("snf D", d)
    return (u_arr, d_arr, _to_int64("snf V", v_red), _to_int64("snf V^-1", v_inv_red))


def _to_int64(what: str, rows: list[list[int]]) -> np.ndarray:
    if any(abs(x) > 2**62 for r in rows for x in r):
        raise OverflowError(f"{what} entries exceed machine integers")
    return np.array(rows, dtype=np.int64)


def _verify_basis_change(m_int, coding, shaping, r: Fraction) -> bool:
    n = coding.dim
    gc = coding.generator
    gs = shaping.generator
    for i in range(n):
        for j in range(n):
            lhs = sum(Fraction(int(m_int[i, k])) * gc[k][j] for k in range(n))
            if lhs != r * gs[i][j]:
                return False
    return True


def leech_pair(index_log2: int) -> NestedLatticePair:
    """Self-similar Leech pairs: 72 -> Lambda24/8Lambda24,
    96 -> Lambda24/16Lambda24."""
    lam = get_lattice("Lambda24")
    if index_log2 == 72:
        return nested_pair(lam, lam.scaled(8))
    if index_log2 == 96:
        return nested_pair(lam, lam.scaled(16))
    raise ValueError("shipped Leech pairs have index_log2 72 or 96")


# ---------------------------------------------------------------------------
# Cubic coding lattice with a Leech-similar shaping sublattice
# ---------------------------------------------------------------------------
#
# W below satisfies W W^T = 8 I, so B = (Leech generator) @ W is an integer
# matrix with Gram 8x the Leech Gram: an exact scaled-rotated copy of the
# Leech lattice sitting inside Z^24 with determinant 2^72 and all-even
# entries.  This realizes a Voronoi constellation whose coding lattice is
# the integer grid (per-coordinate set-partition bit levels) while the
# shaping region keeps the Leech second moment.  2B gives determinant 2^96.

@lru_cache(maxsize=1)
def _w8_matrix() -> np.ndarray:
    blk = np.array([[2, 2], [2, -2]], dtype=np.int64)
    w = np.zeros((24, 24), dtype=np.int64)
    for i in range(12):
        w[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = blk
    return w


@lru_cache(maxsize=1)
def leech_similar_generator_int() -> np.ndarray:
    """Integer generator of the Leech-similar sublattice of Z^24 with
    Gram = 8 x (integer-Leech Gram), |det| = 2^72."""
    b = leech_generator_int() @ _w8_matrix()
    if abs(_int_det(b)) != 2**72:
        raise AssertionError("Leech-similar sublattice determinant != 2^72")
    return b


def get_leech_similar(scale: Fraction | int = 1) -> LatticeDef:
    """The Leech-similar shaping sublattice of Z^24 (family "LeechW")."""
    gen = tuple(tuple(Fraction(int(v)) for v in row) for row in leech_similar_generator_int())
    # geometry = sqrt(8)-scaled integer Leech: covering radius^2 = 8 * 16
    lat = LatticeDef("LeechSim24", 24, gen, Fraction(1), "LeechW",
                     covering_radius_sq=Fraction(128), min_norm_sq=Fraction(256))
    scale = Fraction(scale)
    return lat if scale == 1 else lat.scaled(scale)


def cubic_leech_pair(index_log2: int) -> NestedLatticePair:
    """Cubic coding lattice Z^24 with Leech-geometry shaping: 72 -> Z24/B,
    96 -> Z24/2B (B the Leech-similar sublattice)."""
    z24 = get_lattice("Z24")
    if index_log2 == 72:
        return nested_pair(z24, get_leech_similar())
    if index_log2 == 96:
        return nested_pair(z24, get_leech_similar(2))
    raise ValueError("shipped cubic Leech pairs have index_log2 72 or 96")
