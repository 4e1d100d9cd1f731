"""Monte-Carlo BER engine: SNR sweeps, stop rules, threshold crossings.

Work is split into jobs (one or more LDPC frames with whole shaper blocks);
every job draws its bits and noise from a counter-based stream keyed by
(seed, SNR index, job index), so records are bit-identical across runs and
worker counts, and shard merging is plain counter addition in any order.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .chains import Counters, build_chain, compute_rate
from .channel import worker_rng
from .presets import get_preset

CSV_COLUMNS = ["preset", "snr_db", "bits", "errors", "ber", "frames",
               "ci95_rel", "seconds"]


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 200
    min_bits: int = 2_000_000
    max_bits: int = 200_000_000

    def __post_init__(self):
        if self.min_errors <= 0 or self.min_bits <= 0 or self.max_bits <= 0:
            raise ValueError("stop-rule fields must be positive")

    def done(self, errors: int, bits: int) -> bool:
        if bits >= self.max_bits:
            return True
        return errors >= self.min_errors and bits >= self.min_bits


@dataclass(frozen=True)
class RunSpec:
    preset: str
    snrs_db: tuple
    stop: StopRule = StopRule()
    seed: int = 1
    out_path: str | None = None

    def __post_init__(self):
        snrs = tuple(float(s) for s in self.snrs_db)
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("snr list must be strictly increasing")
        object.__setattr__(self, "snrs_db", snrs)


@dataclass
class BerRecord:
    preset: str
    snr_db: float
    bits: int
    errors: int
    ber: float
    frames: int
    ci95_rel: float
    seconds: float
    extra: dict = field(default_factory=dict)

    def row(self) -> list:
        return [self.preset, f"{self.snr_db:.4g}", self.bits, self.errors,
                f"{self.ber:.6e}", self.frames, f"{self.ci95_rel:.4g}",
                f"{self.seconds:.3f}"]


def wilson_ci95_rel(errors: int, bits: int) -> float:
    """Relative half-width of the 95% Wilson interval around the BER."""
    if bits <= 0 or errors <= 0:
        return math.inf
    z = 1.959963984540054
    p = errors / bits
    denom = 1.0 + z * z / bits
    half = z * math.sqrt(p * (1.0 - p) / bits + z * z / (4.0 * bits * bits)) / denom
    return half / p


_WORKER_CHAIN = None
_WORKER_KEY = None


def _job(args):
    chain_cfg, seed, point_idx, job_idx, snr_db = args
    global _WORKER_CHAIN, _WORKER_KEY
    key = (chain_cfg, seed)
    if _WORKER_KEY != key:
        _WORKER_CHAIN = build_chain(chain_cfg, seed)
        _WORKER_KEY = key
    rng = worker_rng(seed, point_idx, job_idx)
    counters = _WORKER_CHAIN.simulate_job(snr_db, rng)
    return job_idx, vars(counters)


def run_sweep(spec: RunSpec, workers: int | None = None,
              chain_cfg=None) -> list[BerRecord]:
    """One BerRecord per SNR point, deterministic for a given (spec, seed).

    Jobs merge by job index, so results do not depend on the worker count.
    `chain_cfg` overrides the preset lookup (custom config-file chains).
    """
    cfg = chain_cfg if chain_cfg is not None else get_preset(spec.preset)
    compute_rate(cfg)  # validates the configuration before any simulation
    if workers is None:
        workers = max(1, (os.cpu_count() or 2))
    records = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for point_idx, snr in enumerate(spec.snrs_db):
            t0 = time.time()
            total = Counters()
            next_job = 0
            stopped = False
            while not stopped:
                wave = max(1, workers)
                args = [(cfg, spec.seed, point_idx, next_job + i, snr)
                        for i in range(wave)]
                next_job += wave
                if pool is None:
                    results = [_job(a) for a in args]
                else:
                    results = list(pool.map(_job, args))
                # merge strictly in job order and stop at the first job that
                # satisfies the rule: totals never depend on the worker count
                for _, cdict in sorted(results, key=lambda r: r[0]):
                    total = total.merge(Counters(**cdict))
                    if spec.stop.done(total.errors, total.bits):
                        stopped = True
                        break
            records.append(BerRecord(
                preset=spec.preset, snr_db=snr, bits=total.bits,
                errors=total.errors, ber=total.ber, frames=total.frames,
                ci95_rel=wilson_ci95_rel(total.errors, total.bits),
                seconds=time.time() - t0,
                extra={
                    "coded_info_errors": total.coded_info_errors,
                    "coded_info_bits": total.coded_info_bits,
                    "uncoded_errors": total.uncoded_errors,
                    "uncoded_bits": total.uncoded_bits,
                    "deshape_violations": total.deshape_violations,
                    "deshaped_errors": total.deshaped_errors,
                    "unconverged_frames": total.unconverged_frames,
                    "mean_energy_2d": (total.energy_sum / total.twod_symbols
                                       if total.twod_symbols else 0.0),
                }))
    finally:
        if pool is not None:
            pool.shutdown()
    if spec.out_path:
        write_csv(spec.out_path, records)
    return records


def write_csv(path, records: list[BerRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_csv(path) -> list[BerRecord]:
    out = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {rd.fieldnames}")
        for row in rd:
            out.append(BerRecord(
                preset=row["preset"], snr_db=float(row["snr_db"]),
                bits=int(row["bits"]), errors=int(row["errors"]),
                ber=float(row["ber"]), frames=int(row["frames"]),
                ci95_rel=float(row["ci95_rel"]), seconds=float(row["seconds"])))
    return out


class BracketingError(ValueError):
    """The records do not straddle the target BER."""


def snr_at_ber(records: list[BerRecord], target_ber: float) -> float:
    """SNR where the BER curve crosses target, by linear interpolation in
    (snr_db, log10 ber); exact grid hits return the grid point."""
    recs = sorted(records, key=lambda r: r.snr_db)
    for r in recs:
        if r.ber == target_ber:
            return r.snr_db
    for a, b in zip(recs, recs[1:]):
        if a.ber > target_ber > b.ber and b.ber > 0:
            la, lb, lt = math.log10(a.ber), math.log10(b.ber), math.log10(target_ber)
            return a.snr_db + (b.snr_db - a.snr_db) * (lt - la) / (lb - la)
    nearest = sorted(recs, key=lambda r: abs(math.log10(max(r.ber, 1e-300)) -
                                             math.log10(target_ber)))[:2]
    pts = ", ".join(f"({r.snr_db} dB, {r.ber:.3g})" for r in nearest)
    raise BracketingError(
        f"records do not bracket BER {target_ber:g}; nearest points: {pts}")


def compare_gains(records_a: list[BerRecord], records_b: list[BerRecord],
                  threshold: float) -> float:
    """Extra SNR chain A needs relative to chain B at the threshold BER:
    snr_at_ber(A) - snr_at_ber(B).

    Positive means B is the better chain (B "gains" that many dB over A);
    e.g. comparing a shaped-QAM sweep against a Voronoi sweep returns the
    Voronoi constellation's SNR gain.
    """
    return snr_at_ber(records_a, threshold) - snr_at_ber(records_b, threshold)
