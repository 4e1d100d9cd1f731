"""Inner soft-decision FEC: LDPC codes at the DVB-S2 rates, plus the outer
hard-decision FEC threshold model.

Codes follow the DVB-S2 64800-bit structure: systematic IRA with a
staircase parity part and 360-column quasi-cyclic information groups.  The
standard's exact address tables are not redistributable here, so addresses
are drawn deterministically (fixed seed per rate) with the standard's
degree profile, balanced row weights, and no length-4 cycles; H can also be
loaded from an alist file, so measured tables drop in unchanged.

Decoding is normalized min-sum (factor 0.75), flooding schedule, with early
termination on a zero syndrome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

_GROUP = 360

# information-node degree profile per rate for n = 64800:
# list of (group count, degree); groups of 360 columns each
_DVBS2_PROFILES = {
    Fraction(3, 5): ((36, 12), (72, 3)),
    Fraction(2, 3): ((12, 13), (108, 3)),
    Fraction(4, 5): ((18, 11), (126, 3)),
    Fraction(8, 9): ((20, 4), (140, 3)),
    Fraction(9, 10): ((18, 4), (144, 3)),
}

# compact profiles for the short CI code (n = 648, 27-column groups)
_SHORT_PROFILES = {
    Fraction(1, 2): ((2, 8), (10, 4)),
    Fraction(2, 3): ((4, 6), (12, 3)),
}

_MINSUM_SCALE = 0.75
_DEFAULT_ITERS = 50


@dataclass(frozen=True)
class HdFecModel:
    """Outer staircase HD-FEC modeled as a pre-HD-FEC BER threshold only."""

    rate: Fraction = Fraction(239, 255)
    ber_threshold: float = 4.5e-3


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """A systematic IRA LDPC code with its decode structures."""

    n_code: int
    k_info: int
    rate: Fraction
    # flat edge arrays (information part only, for the encoder)
    info_rows: np.ndarray = field(repr=False)
    info_cols: np.ndarray = field(repr=False)
    # full H edge arrays (information + staircase parity part)
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    # padded row-major view: edge_index[m_rows, max_deg], -1 padded
    row_edges: np.ndarray = field(repr=False)

    @property
    def m_rows(self) -> int:
        return self.n_code - self.k_info

    @property
    def n_edges(self) -> int:
        return len(self.rows)


def _build_row_matrix(rows: np.ndarray, m: int) -> np.ndarray:
    order = np.argsort(rows, kind="stable")
    counts = np.bincount(rows, minlength=m)
    dmax = int(counts.max())
    mat = np.full((m, dmax), -1, dtype=np.int64)
    pos = np.zeros(m, dtype=np.int64)
    for e in order:
        r = rows[e]
        mat[r, pos[r]] = e
        pos[r] += 1
    return mat


def _assemble(n: int, k: int, rate: Fraction, info_rows, info_cols) -> LdpcCode:
    m = n - k
    info_rows = np.asarray(info_rows, dtype=np.int64)
    info_cols = np.asarray(info_cols, dtype=np.int64)
    # staircase parity columns: p_r checks row r (and row r+1 for r < m-1)
    pr = [np.arange(m), np.arange(1, m)]
    pc = [np.arange(k, n), np.arange(k, n - 1)]
    rows = np.concatenate([info_rows] + pr)
    cols = np.concatenate([info_cols] + pc)
    return LdpcCode(
        n_code=n, k_info=k, rate=rate,
        info_rows=info_rows, info_cols=info_cols,
        rows=rows, cols=cols,
        row_edges=_build_row_matrix(rows, m),
    )


def _generate_addresses(profile, m: int, q: int, rng: np.random.Generator):
    """Draw per-group parity addresses with balanced residue classes mod q
    (uniform row weights) while avoiding repeated signed pairwise
    differences, which is exactly the 4-cycle condition under the
    quasi-cyclic expansion.  When a clash-free draw is not found the draw
    with the fewest clashes wins (best effort, like the designed tables)."""
    n_groups = sum(g for g, _ in profile)
    total = sum(g * d for g, d in profile)
    quota = np.full(q, total // q, dtype=np.int64)
    for i in range(total % q):
        quota[i] += 1
    seen: set[int] = {0, 1, m - 1}  # +-1 would ride the staircase columns
    groups: list[np.ndarray] = []
    degrees = []
    for g, d in profile:
        degrees += [d] * g
    for d in sorted(degrees, reverse=True):
        group = _draw_group(d, quota, m, q, seen, rng)
        addrs, classes, diffs = group
        seen |= diffs
        for c in classes:
            quota[c] -= 1
        groups.append(np.sort(np.array(addrs, dtype=np.int64)))
    groups.sort(key=lambda a: -len(a))
    if len(groups) != n_groups:
        raise AssertionError
    return groups


def _draw_group(d: int, quota: np.ndarray, m: int, q: int, seen: set,
                rng: np.random.Generator):
    """One group of d parity addresses, drawn address by address so every
    signed pairwise difference stays globally fresh (no 4-cycles).

    Each address retries independently, which keeps the success probability
    per draw high even for degree-13 groups; a handful of group restarts
    covers end-game quota corners.
    """
    span = m // q
    for _restart in range(200):
        work = quota.copy()
        addrs: list[int] = []
        classes: list[int] = []
        diffs: set[int] = set()
        ok = True
        for _slot in range(d):
            placed = False
            for _try in range(400):
                tot = work.sum()
                if tot <= 0:
                    break
                r = int(rng.integers(0, tot))
                c = int(np.searchsorted(np.cumsum(work), r, side="right"))
                a = c + int(rng.integers(0, span)) * q
                if a in addrs:
                    continue
                new: set[int] = set()
                fresh = True
                for b in addrs:
                    dv = (a - b) % m
                    rv = (m - dv) % m
                    if (dv in seen or rv in seen or dv in diffs or rv in diffs
                            or dv in new or rv in new):
                        fresh = False
                        break
                    new.add(dv)
                    new.add(rv)
                if not fresh:
                    continue
                addrs.append(a)
                classes.append(c)
                work[c] -= 1
                diffs.update(new)
                placed = True
                break
            if not placed:
                ok = False
                break
        if ok:
            return addrs, classes, diffs
    raise RuntimeError("address generation stuck; change seed")


@lru_cache(maxsize=16)
def load_code(rate: Fraction | str, length: int = 64800) -> LdpcCode:
    """LDPC code at a supported (rate, length).

    length 64800 covers the DVB-S2 rates {3/5, 2/3, 4/5, 8/9, 9/10};
    length 648 ships short test codes at rates {1/2, 2/3}.
    """
    rate = Fraction(rate)
    if length == 64800:
        profiles, group = _DVBS2_PROFILES, _GROUP
    elif length == 648:
        profiles, group = _SHORT_PROFILES, 27
    else:
        raise ValueError(f"unsupported code length {length}")
    profile = profiles.get(rate)
    if profile is None:
        raise ValueError(f"unsupported rate {rate} for length {length}")
    k = int(rate * length)
    m = length - k
    if sum(g for g, _ in profile) * group != k:
        raise AssertionError("profile does not cover the information bits")
    q, rem = divmod(m, group)
    if rem:
        raise AssertionError("parity bits not divisible by the group size")
    rng = np.random.default_rng(
        np.random.SeedSequence((0xD5B52, rate.numerator, rate.denominator, length)))
    groups = _generate_addresses(profile, m, q, rng)
    # expand: bit (g*group + l) connects to (addr + l*q) mod m
    rows_parts = []
    cols_parts = []
    for g, addrs in enumerate(groups):
        ll = np.arange(group)
        r = (addrs[None, :] + ll[:, None] * q) % m
        c = np.repeat(g * group + ll, len(addrs))
        rows_parts.append(r.ravel())
        cols_parts.append(c)
    return _assemble(length, k, rate, np.concatenate(rows_parts), np.concatenate(cols_parts))


def encode(code: LdpcCode, info_bits) -> np.ndarray:
    """Systematic encode: parity bits are the running XOR of the per-row
    information sums (staircase accumulator)."""
    u = np.asarray(info_bits)
    if u.shape[-1] != code.k_info:
        raise ValueError(f"expected {code.k_info} information bits, got {u.shape[-1]}")
    single = u.ndim == 1
    u2 = np.atleast_2d(u).astype(np.int64)
    out = np.empty((u2.shape[0], code.n_code), dtype=np.uint8)
    for i, row in enumerate(u2):
        s = np.bincount(code.info_rows, weights=row[code.info_cols],
                        minlength=code.m_rows)
        p = np.cumsum(s.astype(np.int64)) & 1
        out[i, : code.k_info] = row
        out[i, code.k_info :] = p
    return out[0] if single else out


def syndrome_ok(code: LdpcCode, bits) -> bool:
    b = np.asarray(bits).astype(np.int64)
    s = np.bincount(code.rows, weights=b[code.cols], minlength=code.m_rows)
    return not (s.astype(np.int64) & 1).any()


def decode(code: LdpcCode, llrs, max_iters: int = _DEFAULT_ITERS):
    """Normalized min-sum decoding (LLR > 0 means bit 0).

    Returns (hard bits over the full codeword, converged flag, iterations).
    Messages are float32; deterministic for identical inputs.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.n_code,):
        raise ValueError(f"expected {code.n_code} LLRs")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not llrs.any():
        # degenerate input carries no information; never claim convergence
        return np.zeros(code.n_code, dtype=np.uint8), False, 0
    cols = code.cols
    redges = code.row_edges
    m, dmax = redges.shape
    valid_flat = np.nonzero(redges.ravel() >= 0)[0]
    edge_order = redges.ravel()[valid_flat]  # edge id per valid matrix slot
    chan = llrs.astype(np.float32)
    c2v = np.zeros(code.n_edges, dtype=np.float32)
    post = chan.copy()
    hard = post < 0
    if syndrome_ok(code, hard):
        return hard.astype(np.uint8), True, 0
    msg = np.full((m, dmax), np.inf, dtype=np.float32)
    msg_flat = msg.ravel()
    col_of = np.arange(dmax)[None, :]
    for it in range(1, max_iters + 1):
        v2c = post[cols] - c2v
        msg_flat[valid_flat] = v2c[edge_order]
        mag = np.abs(msg)
        two = np.argpartition(mag, 1, axis=1)[:, :2]
        amin = two[:, 0]
        ar = np.arange(m)
        min1 = mag[ar, amin]
        min2 = mag[ar, two[:, 1]]
        neg = msg < 0
        row_sign = 1.0 - 2.0 * (neg.sum(axis=1) & 1)
        outmag = np.where(col_of == amin[:, None], min2[:, None], min1[:, None])
        new_msgs = np.float32(_MINSUM_SCALE) * row_sign[:, None].astype(np.float32) \
            * np.where(neg, -outmag, outmag)
        c2v[edge_order] = new_msgs.ravel()[valid_flat]
        post = chan + np.bincount(cols, weights=c2v, minlength=code.n_code).astype(np.float32)
        hard = post < 0
        if syndrome_ok(code, hard):
            return hard.astype(np.uint8), True, it
    return hard.astype(np.uint8), False, max_iters


# ---------------------------------------------------------------------------
# alist sparse-matrix interchange
# ---------------------------------------------------------------------------

def write_alist(code: LdpcCode, path) -> None:
    """Standard alist text format (1-based indices, zero padded)."""
    n, m = code.n_code, code.m_rows
    col_lists: list[list[int]] = [[] for _ in range(n)]
    row_lists: list[list[int]] = [[] for _ in range(m)]
    for r, c in zip(code.rows, code.cols):
        col_lists[c].append(int(r) + 1)
        row_lists[r].append(int(c) + 1)
    dc = max(len(x) for x in col_lists)
    dr = max(len(x) for x in row_lists)
    with open(path, "w") as fh:
        fh.write(f"{n} {m}\n{dc} {dr}\n")
        fh.write(" ".join(str(len(x)) for x in col_lists) + "\n")
        fh.write(" ".join(str(len(x)) for x in row_lists) + "\n")
        for lst in col_lists:
            fh.write(" ".join(map(str, lst + [0] * (dc - len(lst)))) + "\n")
        for lst in row_lists:
            fh.write(" ".join(map(str, lst + [0] * (dr - len(lst)))) + "\n")


def read_alist(path, rate: Fraction | None = None) -> LdpcCode:
    """Load an alist parity-check matrix.

    The parity part (last m columns) must be the staircase form so the
    systematic encoder applies; anything else is rejected.
    """
    with open(path) as fh:
        tokens = fh.read().split()
    it = iter(tokens)
    n = int(next(it))
    m = int(next(it))
    next(it), next(it)
    col_deg = [int(next(it)) for _ in range(n)]
    [int(next(it)) for _ in range(m)]
    rows_l = []
    cols_l = []
    dc = max(col_deg)
    for c in range(n):
        entries = [int(next(it)) for _ in range(dc)]
        for r in entries:
            if r:
                rows_l.append(r - 1)
                cols_l.append(c)
    k = n - m
    rows = np.array(rows_l, dtype=np.int64)
    cols = np.array(cols_l, dtype=np.int64)
    info = cols < k
    # verify staircase parity structure
    for r, c in zip(rows[~info], cols[~info]):
        if not (c - k == r or c - k == r - 1):
            raise ValueError("parity part of H is not in staircase form")
    if rate is None:
        rate = Fraction(k, n)
    return _assemble(n, k, rate, rows[info], cols[info])
