"""Render BER waterfalls and constellation projections from CSV exports.

Input schemas:
  sweep CSV:      preset,snr_db,bits,errors,ber,frames,ci95_rel,seconds
  projection CSV: x,y
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SWEEP_COLUMNS = ["preset", "snr_db", "bits", "errors", "ber", "frames",
                 "ci95_rel", "seconds"]

_STYLE_CYCLE = ["o-", "s-", "^-", "v-", "D-", "x-", "*-", "p-"]


class MalformedCsvError(ValueError):
    """Input file does not follow the documented schema."""


@dataclass
class PlotJob:
    csv_paths: list
    out_path: str
    threshold: float = 4.5e-3
    title: str | None = None
    projection_paths: list = field(default_factory=list)

    def __post_init__(self):
        if not self.csv_paths and not self.projection_paths:
            raise ValueError("a plot job needs at least one input file")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")


def read_sweep_csv(path) -> dict[str, list[tuple[float, float]]]:
    """CSV -> {preset: [(snr_db, ber), ...]} sorted by SNR."""
    series: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_COLUMNS:
            raise MalformedCsvError(
                f"{path}: expected columns {SWEEP_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            try:
                snr = float(row["snr_db"])
                ber = float(row["ber"])
            except (KeyError, TypeError, ValueError) as err:
                raise MalformedCsvError(f"{path}: bad row {row}") from err
            series.setdefault(row["preset"], []).append((snr, ber))
    if not series or all(not pts for pts in series.values()):
        raise MalformedCsvError(f"{path}: no data rows")
    for pts in series.values():
        pts.sort()
    return series


def read_projection_csv(path) -> list[tuple[float, float]]:
    pts = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["x", "y"]:
            raise MalformedCsvError(f"{path}: expected columns x,y")
        for row in reader:
            try:
                pts.append((float(row["x"]), float(row["y"])))
            except (TypeError, ValueError) as err:
                raise MalformedCsvError(f"{path}: bad row {row}") from err
    if not pts:
        raise MalformedCsvError(f"{path}: no samples")
    return pts


def plot_ber(job: PlotJob) -> str:
    """Log-BER waterfalls, one series per preset, with the HD-FEC threshold
    line; series are ordered in the legend by their crossing SNR."""
    series: dict[str, list[tuple[float, float]]] = {}
    for path in job.csv_paths:
        for preset, pts in read_sweep_csv(path).items():
            series.setdefault(preset, []).extend(pts)
    fig, ax = plt.subplots(figsize=(7.2, 5.2))
    ordered = sorted(series.items(), key=lambda kv: _crossing_key(kv[1], job.threshold))
    for i, (preset, pts) in enumerate(ordered):
        pts = sorted(pts)
        snrs = [p[0] for p in pts]
        bers = [max(p[1], 1e-12) for p in pts]
        ax.semilogy(snrs, bers, _STYLE_CYCLE[i % len(_STYLE_CYCLE)],
                    label=preset, markersize=4.5)
    ax.axhline(job.threshold, color="k", linestyle="--", linewidth=1.0,
               label=f"HD-FEC threshold {job.threshold:g}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("pre-HD-FEC BER")
    ax.grid(True, which="both", alpha=0.3)
    if job.title:
        ax.set_title(job.title)
    ax.legend(fontsize=8)
    _render_insets(fig, job.projection_paths)
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=150)
    plt.close(fig)
    return job.out_path


def _crossing_key(pts, threshold: float) -> float:
    pts = sorted(pts)
    for (s1, b1), (s2, b2) in zip(pts, pts[1:]):
        if b1 > threshold >= b2 and b2 > 0:
            import math
            return s1 + (s2 - s1) * (math.log10(threshold or 1) - math.log10(b1)) / \
                (math.log10(b2) - math.log10(b1))
    return pts[-1][0] + 100.0  # never crosses: sort to the end


def _render_insets(fig, projection_paths) -> None:
    for i, path in enumerate(projection_paths[:2]):
        pts = read_projection_csv(path)
        axi = fig.add_axes([0.16 + 0.24 * i, 0.18, 0.18, 0.24])
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        axi.hexbin(xs, ys, gridsize=45, cmap="viridis", bins="log")
        axi.set_xticks([])
        axi.set_yticks([])
        axi.set_title(Path(path).stem, fontsize=6)


def plot_projection(job: PlotJob) -> str:
    """Density scatter of 2-D projection samples (one panel per CSV)."""
    paths = job.projection_paths or job.csv_paths
    if not paths:
        raise ValueError("no projection inputs")
    fig, axes = plt.subplots(1, len(paths), figsize=(4.2 * len(paths), 4.0),
                             squeeze=False)
    for ax, path in zip(axes[0], paths):
        pts = read_projection_csv(path)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        hb = ax.hexbin(xs, ys, gridsize=55, cmap="viridis", bins="log")
        ax.set_aspect("equal")
        ax.set_title(Path(path).stem, fontsize=9)
        fig.colorbar(hb, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=150)
    plt.close(fig)
    return job.out_path
