"""AWGN channel and SNR accounting.

SNR is Es/N0 per 2-D (complex) symbol with unit-energy constellations:
sigma2 = es / (2 * 10^(snr_db/10)) per real dimension.  This is the only
definition that puts 24-D lattice constellations and 2-D QAM on one axis.

Noise comes from a counter-based generator (Philox) so independent workers
get reproducible, non-overlapping streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MIN_SNR_DB = -100.0


def sigma_from_snr(snr_db: float, es: float = 1.0) -> float:
    """Noise variance per real dimension for a given Es/N0 per 2-D."""
    if es <= 0:
        raise ValueError("es must be positive")
    if snr_db <= _MIN_SNR_DB:
        raise ValueError(f"snr_db {snr_db} below the {_MIN_SNR_DB} dB guard")
    return es / (2.0 * 10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class ChannelSpec:
    snr_db: float
    es: float = 1.0

    @property
    def sigma2(self) -> float:
        return sigma_from_snr(self.snr_db, self.es)


def add_noise(spec: ChannelSpec, x, rng: np.random.Generator) -> np.ndarray:
    """y = x + n with n i.i.d. Gaussian(0, sigma2) per real dimension."""
    x = np.asarray(x, dtype=np.float64)
    return x + rng.standard_normal(x.shape) * np.sqrt(spec.sigma2)


def worker_rng(seed: int, *stream) -> np.ndarray:
    """Philox generator for an (seed, stream...) tuple; reproducible and
    independent across workers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, *stream))))
