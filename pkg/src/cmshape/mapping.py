"""PAM/QAM constellations, MLC bit labeling, and soft metrics.

The PAM alphabet factorizes as amplitudes times signs.  Amplitude labels
are natural binary over {1, 3, ..., 2^m - 1}; the sign bit toggles only the
sign, so the labeling is sign-bit decomposable and shaping acts on the
amplitude bits alone.

Two least-reliable-bit conventions are provided for the MLC inner code:

* "set-partition" (default): the coded bit is sign XOR amplitude-LSB,
  which alternates along the ordered PAM levels.  Conditioning on it
  doubles the minimum distance of the surviving subset, which is what
  multi-stage decoding wants.
* "sign": the coded bit is the sign itself (no distance growth).

All LLRs are exact log-sum-exp computations; positive LLR favors bit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .shaping import default_alphabet


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    peak = a.max(axis=axis, keepdims=True)
    out = np.log(np.exp(a - peak).sum(axis=axis)) + np.squeeze(peak, axis=axis)
    return out


@dataclass(frozen=True, eq=False)
class PamConstellation:
    """2^m-ary PAM with a (possibly shaped) amplitude prior.

    `norm` scales the integer levels so the mean symbol energy under the
    prior is 1/2 per real dimension (unit energy per 2-D).
    """

    m: int
    prior: np.ndarray = field(repr=False)
    norm: float = 1.0

    @cached_property
    def amplitudes(self) -> np.ndarray:
        return np.array(default_alphabet(self.m), dtype=np.float64)

    @cached_property
    def levels(self) -> np.ndarray:
        """All 2^m levels in ascending order, scaled by norm."""
        n_levels = 1 << self.m
        return (2.0 * np.arange(n_levels) - (n_levels - 1)) * self.norm

    @cached_property
    def level_prior(self) -> np.ndarray:
        """Probability of each ordered level (uniform signs)."""
        half = self.prior / 2.0
        return np.concatenate([half[::-1], half])

    @cached_property
    def level_parity(self) -> np.ndarray:
        """Set-partition bit of each ordered level (its index parity)."""
        return np.arange(1 << self.m) % 2


def make_pam(m: int, prior=None, unit_energy: bool = True) -> PamConstellation:
    """Build a PAM constellation; prior defaults to uniform amplitudes."""
    n_amp = 1 << (m - 1)
    if prior is None:
        p = np.full(n_amp, 1.0 / n_amp)
    else:
        p = np.asarray(prior, dtype=np.float64)
        if p.shape != (n_amp,):
            raise ValueError(f"prior needs {n_amp} entries for m={m}")
        if abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
            raise ValueError("prior must be a probability vector")
    if unit_energy:
        amps = np.array(default_alphabet(m), dtype=np.float64)
        mean_sq = float((p * amps**2).sum())
        norm = math.sqrt(0.5 / mean_sq)
    else:
        norm = 1.0
    return PamConstellation(m=m, prior=p, norm=norm)


def pam_map(c: PamConstellation, sign_bit, amplitude_bits) -> np.ndarray:
    """Map (sign bit, m-1 amplitude bits) to a PAM level.

    Natural binary amplitude labeling (00 -> 1, 01 -> 3, ...); sign bit 0
    is positive.  Vectorized over leading axes.
    """
    sign_bit = np.asarray(sign_bit)
    amplitude_bits = np.asarray(amplitude_bits)
    if amplitude_bits.shape[-1] != c.m - 1:
        raise ValueError(f"expected {c.m - 1} amplitude bits")
    weights = 1 << np.arange(c.m - 2, -1, -1)
    v = (amplitude_bits * weights).sum(axis=-1)
    amp = 2 * v + 1
    sign = 1.0 - 2.0 * sign_bit
    return sign * amp * c.norm


def amp_index_to_bits(c: PamConstellation, v: np.ndarray) -> np.ndarray:
    """Natural binary label bits (MSB first) of amplitude indices v."""
    shifts = np.arange(c.m - 2, -1, -1)
    return ((np.asarray(v)[..., None] >> shifts) & 1).astype(np.uint8)


def sign_llr(c: PamConstellation, y, sigma2: float) -> np.ndarray:
    """Exact sign-bit LLR with the amplitude prior marginalized out.

    ln sum_a P(a) exp(-(y - a*norm)^2 / 2s2) - ln sum_a P(a) exp(-(y + a*norm)^2 / 2s2)
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.float64)
    scaled = c.amplitudes * c.norm
    logp = np.log(c.prior)
    pos = logp - (y[..., None] - scaled) ** 2 / (2.0 * sigma2)
    neg = logp - (y[..., None] + scaled) ** 2 / (2.0 * sigma2)
    return _logsumexp(pos, -1) - _logsumexp(neg, -1)


def level_llr(c: PamConstellation, y, sigma2: float) -> np.ndarray:
    """Exact LLR of the set-partition bit (sign XOR amplitude-LSB).

    Positive favors bit 0, i.e. the even-index levels.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.float64)
    logp = np.log(np.maximum(c.level_prior, 1e-300))
    metric = logp - (y[..., None] - c.levels) ** 2 / (2.0 * sigma2)
    even = c.level_parity == 0
    return _logsumexp(metric[..., even], -1) - _logsumexp(metric[..., ~even], -1)


def amplitude_hd(c: PamConstellation, y, decoded_sign) -> np.ndarray:
    """ML amplitude decision given the decoded sign: nearest level of the
    sign-adjusted observation, exact midpoints resolving to the lower
    amplitude.  Returns the m-1 natural label bits."""
    y = np.asarray(y, dtype=np.float64)
    sign = 1.0 - 2.0 * np.asarray(decoded_sign)
    z = y * sign  # fold onto the positive ray
    v = np.ceil((z / c.norm - 1.0) / 2.0 - 0.5)
    v = np.clip(v, 0, (1 << (c.m - 1)) - 1).astype(np.int64)
    return amp_index_to_bits(c, v)


def coset_hd(c: PamConstellation, y, decoded_lrb) -> tuple[np.ndarray, np.ndarray]:
    """Joint (sign, amplitude) decision restricted to the decoded coset.

    Given the set-partition bit, the admissible levels alternate with twice
    the spacing; the nearest admissible level yields both the sign bit and
    the natural amplitude label bits.  Ties go to the lower level.
    """
    y = np.asarray(y, dtype=np.float64)
    e = np.asarray(decoded_lrb)
    n_levels = 1 << c.m
    # continuous level coordinate: level t sits at (2t - (n-1)) * norm
    tc = (y / c.norm + (n_levels - 1)) / 2.0
    t = e + 2.0 * np.ceil((tc - e) / 2.0 - 0.5)
    t = np.clip(t, e, n_levels - 2 + e).astype(np.int64)
    sign_bit = (t < (n_levels >> 1)).astype(np.uint8)
    amp = np.abs(2 * t - (n_levels - 1))
    v = (amp - 1) >> 1
    return sign_bit, amp_index_to_bits(c, v)


def lrb_of(sign_bit, amp_bits, mode: str = "set-partition") -> np.ndarray:
    """The inner-coded bit of a symbol under the chosen LRB convention."""
    sign_bit = np.asarray(sign_bit)
    if mode == "sign":
        return sign_bit.astype(np.uint8)
    if mode == "set-partition":
        lsb = np.asarray(amp_bits)[..., -1]
        return (sign_bit ^ lsb).astype(np.uint8)
    raise ValueError(f"unknown LRB mode {mode!r}")


def sign_from_lrb(lrb_bit, amp_bits, mode: str = "set-partition") -> np.ndarray:
    """Sign bit realizing the coded bit for given amplitude bits."""
    lrb_bit = np.asarray(lrb_bit)
    if mode == "sign":
        return lrb_bit.astype(np.uint8)
    if mode == "set-partition":
        lsb = np.asarray(amp_bits)[..., -1]
        return (lrb_bit ^ lsb).astype(np.uint8)
    raise ValueError(f"unknown LRB mode {mode!r}")


# ---------------------------------------------------------------------------
# Gray-labeled QAM (BICM baseline)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GrayPam:
    """Uniform 2^m PAM with binary-reflected Gray labeling (BICM use)."""

    m: int

    @cached_property
    def norm(self) -> float:
        mean_sq = ((4**self.m) - 1) / 3.0
        return math.sqrt(0.5 / mean_sq)

    @cached_property
    def levels(self) -> np.ndarray:
        n_levels = 1 << self.m
        return (2.0 * np.arange(n_levels) - (n_levels - 1)) * self.norm

    @cached_property
    def gray_labels(self) -> np.ndarray:
        idx = np.arange(1 << self.m)
        return idx ^ (idx >> 1)

    @cached_property
    def level_bits(self) -> np.ndarray:
        """(2^m, m) bit matrix of each level's Gray label, MSB first."""
        shifts = np.arange(self.m - 1, -1, -1)
        return ((self.gray_labels[:, None] >> shifts) & 1).astype(np.uint8)

    @cached_property
    def bits_to_level(self) -> np.ndarray:
        """Level index for each m-bit Gray label value."""
        inv = np.empty(1 << self.m, dtype=np.int64)
        inv[self.gray_labels] = np.arange(1 << self.m)
        return inv


def gray_pam_map(g: GrayPam, bits) -> np.ndarray:
    """(..., m) Gray label bits (MSB first) -> PAM levels."""
    bits = np.asarray(bits)
    weights = 1 << np.arange(g.m - 1, -1, -1)
    labels = (bits * weights).sum(axis=-1)
    return g.levels[g.bits_to_level[labels]]


def gray_pam_llr(g: GrayPam, y, sigma2: float) -> np.ndarray:
    """Exact per-bit LLRs of Gray PAM, (..., m), MSB first."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    y = np.asarray(y, dtype=np.float64)
    metric = -((y[..., None] - g.levels) ** 2) / (2.0 * sigma2)
    out = np.empty(y.shape + (g.m,))
    for b in range(g.m):
        zero = g.level_bits[:, b] == 0
        out[..., b] = _logsumexp(metric[..., zero], -1) - _logsumexp(metric[..., ~zero], -1)
    return out


def gray_qam_llr(m: int, y, sigma2: float) -> np.ndarray:
    """Per-bit LLRs for square Gray 4^m-QAM given complex observations.

    Returns (..., 2m): the I-dimension bits first, then Q, MSB first
    within each dimension.  Exact by I/Q separability.
    """
    g = GrayPam(m)
    y = np.asarray(y)
    re = gray_pam_llr(g, np.real(y), sigma2)
    im = gray_pam_llr(g, np.imag(y), sigma2)
    return np.concatenate([re, im], axis=-1)
