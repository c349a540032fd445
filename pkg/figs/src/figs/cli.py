"""Command-line entry point: one subcommand per figure kind."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .jobs import FigureJob
from .render import render
from .schemas import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logchaos-figs",
        description="render figures from logchaos CSV and dump outputs",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output image (.png or .svg)")
        p.add_argument("--dpi", type=int, default=150)
        p.add_argument("--title", default=None)

    p = sub.add_parser("gff-views", help="surface + contour pair from a field dump")
    p.add_argument("dump_dir", help="directory with field.bin and manifest.txt")
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--cmap", default="viridis")
    common(p)

    p = sub.add_parser("convergence", help="log-log error plot from convergence.csv")
    p.add_argument("csv_path")
    p.add_argument("--band", type=float, default=3.0, help="SE multiplier for the band")
    common(p)

    p = sub.add_parser("thick-points", help="error decay plot from thickpoints.csv")
    p.add_argument("csv_path")
    p.add_argument("--band", type=float, default=3.0, help="SE multiplier for error bars")
    common(p)

    p = sub.add_parser("gn-sequence", help="g_N plot from zeta_gn.csv or circle_gn.csv")
    p.add_argument("csv_path")
    p.add_argument("--logy", action="store_true")
    common(p)
    return parser


def _job_of(args: argparse.Namespace) -> FigureJob:
    style: dict[str, object] = {"dpi": args.dpi}
    if args.title is not None:
        style["title"] = args.title
    if args.kind == "gff-views":
        src = args.dump_dir
        style["replica"] = args.replica
        style["cmap"] = args.cmap
    else:
        src = args.csv_path
    if args.kind in ("convergence", "thick-points"):
        style["band"] = args.band
    if args.kind == "gn-sequence" and args.logy:
        style["logy"] = True
    return FigureJob(kind=args.kind, inputs=(Path(src),),
                     out_path=Path(args.out), style=style)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out = render(_job_of(args))
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface anything unexpected
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 4
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
