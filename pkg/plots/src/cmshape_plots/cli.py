"""`plot` command line: `plot ber ...` and `plot proj ...`."""

from __future__ import annotations

import argparse
import sys

from .plotting import PlotJob, plot_ber, plot_projection


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot",
        description="Render BER curves and constellation projections from "
                    "cmshape CSV exports.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ber", help="log-BER curves with the HD-FEC threshold line")
    p.add_argument("--csv", nargs="+", required=True, help="sweep CSV file(s)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--threshold", type=float, default=4.5e-3)
    p.add_argument("--title")
    p.add_argument("--proj", nargs="*", default=[],
                   help="optional projection CSVs rendered as insets")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("proj", help="2-D projection density panels")
    p.add_argument("--csv", nargs="+", required=True, help="projection CSV file(s)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_proj)

    args = ap.parse_args(argv)
    return args.func(args)


def _cmd_ber(args) -> int:
    job = PlotJob(csv_paths=list(args.csv), out_path=args.out,
                  threshold=args.threshold, title=args.title,
                  projection_paths=list(args.proj))
    out = plot_ber(job)
    print(f"wrote {out}")
    return 0


def _cmd_proj(args) -> int:
    job = PlotJob(csv_paths=[], out_path=args.out,
                  projection_paths=list(args.csv))
    out = plot_projection(job)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
