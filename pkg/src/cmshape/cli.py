"""Command-line front end: run sweeps, read gains, audit the rate table."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .chains import compute_rate, format_rate
from .config import chain_config_from_mapping, load_config
from .fec import HdFecModel
from .harness import (RunSpec, StopRule, compare_gains, read_csv, run_sweep,
                      snr_at_ber)
from .presets import TABLE_ROWS, get_preset, preset_names


def _parse_snrs(text: str) -> tuple:
    """Either 'a:b:step' or a comma-separated list of dB values."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("use a:b:step or v1,v2,...")
        a, b, step = (float(p) for p in parts)
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError("need b >= a and step > 0")
        out = []
        v = a
        while v <= b + 1e-9:
            out.append(round(v, 6))
            v += step
        return tuple(out)
    return tuple(float(p) for p in text.split(","))


def _cmd_run(args) -> int:
    mapping = load_config(args.config) if args.config else {}
    preset = args.preset or mapping.get("preset")
    chain_cfg = None
    if preset:
        name = str(preset)
        chain_cfg = get_preset(name)
    elif "scheme" in mapping:
        name = str(mapping.get("name", "custom"))
        chain_cfg = chain_config_from_mapping(name, mapping)
    else:
        print("error: give --preset or a config with scheme/preset", file=sys.stderr)
        return 2
    snr_text = args.snr or mapping.get("snr")
    if not snr_text:
        print("error: no SNR list (--snr a:b:step)", file=sys.stderr)
        return 2
    stop = StopRule(
        min_errors=int(args.min_errors or mapping.get("min_errors", 200)),
        min_bits=int(args.min_bits or mapping.get("min_bits", 2_000_000)),
        max_bits=int(args.max_bits or mapping.get("max_bits", 200_000_000)),
    )
    spec = RunSpec(preset=name, snrs_db=_parse_snrs(str(snr_text)),
                   stop=stop, seed=int(args.seed if args.seed is not None
                                       else mapping.get("seed", 1)),
                   out_path=args.out or mapping.get("out"))
    workers = args.workers if args.workers is not None else mapping.get("workers")
    records = run_sweep(spec, workers=workers, chain_cfg=chain_cfg)
    for r in records:
        print(f"{r.preset} @ {r.snr_db:g} dB: ber={r.ber:.4e} "
              f"({r.errors}/{r.bits} bits, ci95 {r.ci95_rel:.2g}, {r.seconds:.1f}s)")
    if spec.out_path:
        print(f"wrote {spec.out_path}")
    return 0


def _cmd_gains(args) -> int:
    ra = read_csv(args.csv_a)
    rb = read_csv(args.csv_b)
    sa = snr_at_ber(ra, args.threshold)
    sb = snr_at_ber(rb, args.threshold)
    delta = compare_gains(ra, rb, args.threshold)
    print(f"{ra[0].preset}: {sa:.3f} dB at BER {args.threshold:g}")
    print(f"{rb[0].preset}: {sb:.3f} dB at BER {args.threshold:g}")
    print(f"gain of {rb[0].preset} over {ra[0].preset}: {delta:+.3f} dB")
    return 0


def _cmd_audit_rates(args) -> int:
    print(f"{'preset':<24}{'scheme':<8}{'R_inner':<9}{'R_s':<7}{'R_t (bits/2D)':<14}")
    for name in TABLE_ROWS:
        cfg = get_preset(name)
        rs = f"{float(cfg.shaper_rs):.4g}" if cfg.scheme == "ps-mlc" else "-"
        print(f"{name:<24}{cfg.scheme:<8}{str(cfg.ldpc_rate):<9}{rs:<7}"
              f"{format_rate(compute_rate(cfg)):<14}")
    return 0


def _cmd_proj(args) -> int:
    import csv as _csv

    import numpy as np

    from .chains import build_chain
    from .channel import worker_rng

    cfg = get_preset(args.preset)
    chain = build_chain(cfg, seed=args.seed)
    rng = worker_rng(args.seed, 0xB10B)
    if cfg.scheme == "vc-mlc":
        from .voronoi import constellation_stats
        stats = constellation_stats(chain.vcode, max(1000, args.samples))
        pts = stats["projection"][: args.samples]
    else:
        counters = None
        pts = []
        need = args.samples
        while need > 0:
            if cfg.scheme == "ps-mlc":
                f, b = chain.frames_per_job, chain.blocks_per_job
                info = rng.integers(0, 2, size=(f, chain.code.k_info)).astype("uint8")
                sbits = rng.integers(0, 2, size=(b, chain.bits_per_block)).astype("uint8")
                tx = chain.transmit(info, sbits)
            else:
                info = rng.integers(0, 2, size=(1, chain.code.k_info)).astype("uint8")
                tx = chain.transmit(info)
            sym = tx["symbols"]
            pts.append(np.stack([np.real(sym), np.imag(sym)], axis=1))
            need -= len(sym)
        pts = np.concatenate(pts)[: args.samples]
    with open(args.out, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in np.asarray(pts):
            w.writerow([f"{x:.6g}", f"{y:.6g}"])
    print(f"wrote {len(pts)} projection samples to {args.out}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cmshape",
        description="Coded-modulation BER toolkit: Voronoi constellations vs "
                    "probabilistic shaping over AWGN.")
    ap.add_argument("--version", action="version", version=f"cmshape {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="Monte-Carlo BER sweep for one chain")
    p.add_argument("--config", help="flat key/value config file")
    p.add_argument("--preset", help=f"one of: {', '.join(preset_names())}")
    p.add_argument("--snr", help="a:b:step or comma list, in dB")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--min-errors", type=int, default=None)
    p.add_argument("--min-bits", type=int, default=None)
    p.add_argument("--max-bits", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("gains", help="SNR gain between two sweep CSVs")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--threshold", type=float, default=HdFecModel().ber_threshold)
    p.set_defaults(func=_cmd_gains)

    p = sub.add_parser("audit-rates", help="print the configuration-table rates")
    p.set_defaults(func=_cmd_audit_rates)

    p = sub.add_parser("proj", help="export 2-D projection samples as CSV")
    p.add_argument("--preset", required=True)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_proj)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
