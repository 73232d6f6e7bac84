"""render_fig <kind> <csv> <out-image> command-line entry point."""

from __future__ import annotations

import argparse
import sys

from ghzq_figures.io import FigureDataError
from ghzq_figures.plots import FIGURE_KINDS, FigureJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_fig",
        description="Render a publication-style figure from a ghzq result CSV",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("csv", help="ghzq result file with metadata header")
    parser.add_argument("out", help="output image path (.png, .pdf, .svg)")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = FigureJob(kind=args.kind, csv_path=args.csv, out_path=args.out,
                    dpi=args.dpi)
    try:
        report = render(job)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    lines = ", ".join(report.reference_lines)
    print(f"wrote {report.out_path} ({report.n_series} series; refs: {lines})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
