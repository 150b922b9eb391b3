"""Command line interface: `phoenixmap render` and `phoenixmap synth`.

Exit codes: 0 success, 1 input error, 2 geometry failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import INPUT_ERRORS, PhoenixmapError
from .io import SYNTH_KINDS, generate_synthetic, load_outline, load_points, \
    write_points_csv
from .pipeline import Config, run_pipeline, sidecar_json

logger = logging.getLogger("phoenixmap")


class _ColorFormatter(logging.Formatter):
    COLORS = {logging.WARNING: "\x1b[33m", logging.ERROR: "\x1b[31m"}

    def __init__(self, use_color: bool):
        super().__init__("%(levelname)s: %(message)s")
        self.use_color = use_color

    def format(self, record):
        text = super().format(record)
        color = self.COLORS.get(record.levelno)
        if self.use_color and color:
            return f"{color}{text}\x1b[0m"
        return text


def _setup_logging():
    use_color = sys.stderr.isatty() and not os.environ.get("PHOENIXMAP_NO_COLOR")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_ColorFormatter(use_color))
    logger.handlers = [handler]
    logger.setLevel(logging.INFO)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _canvas(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"canvas must look like 1000x800, got {text!r}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="phoenixmap",
                     description="Outline maps whose stroke width encodes "
                                 "interior point density")
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", parents=[], help="render points to SVG")
    render.add_argument("--input", required=True, help="CSV or GeoJSON points")
    render.add_argument("--format", choices=("csv", "geojson"), default=None)
    render.add_argument("--outline", default=None,
                        help="predefined outline (GeoJSON Polygon or CSV ring)")
    render.add_argument("--hull", choices=("concave", "convex"), default="concave")
    render.add_argument("--segments", type=int, default=3000)
    render.add_argument("--window", type=int, default=None,
                        help="sliding window half-size (default: segments/10)")
    render.add_argument("--scale", type=float, default=None,
                        help="density-to-width scale (default: auto)")
    render.add_argument("--max-width", type=float, default=30.0,
                        help="target peak width in render units for the auto scale")
    render.add_argument("--k", type=int, default=3, help="hull neighbour count")
    render.add_argument("--offset", type=float, default=None,
                        help="outward outline offset (default: 2%% of bbox diagonal)")
    render.add_argument("--palette", default="qual6")
    render.add_argument("--legend-bins", type=int, default=100)
    render.add_argument("--legend-bars", type=int, default=4)
    render.add_argument("--no-legend", action="store_true")
    render.add_argument("--dots", action="store_true",
                        help="add a static dot layer of the raw observations")
    render.add_argument("--heat", action="store_true",
                        help="add a kernel-density raster reference layer")
    render.add_argument("--heat-bandwidth", type=float, default=None)
    render.add_argument("--opacity", type=float, default=0.85)
    render.add_argument("--canvas", type=_canvas, default=(1000, 800))
    render.add_argument("--out", required=True, help="output SVG path")
    render.add_argument("--sidecar", default=None, help="output sidecar JSON path")

    synth = sub.add_parser("synth", help="write a seeded synthetic point table")
    synth.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    synth.add_argument("--count", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--series", default=None)
    synth.add_argument("--time", default=None)
    synth.add_argument("--center", type=float, nargs=2, default=(5.0, 5.0))
    synth.add_argument("--sigma", type=float, default=1.5)
    synth.add_argument("--low", type=float, nargs=2, default=(0.0, 0.0))
    synth.add_argument("--high", type=float, nargs=2, default=(10.0, 10.0))
    synth.add_argument("--r1", type=float, default=3.0)
    synth.add_argument("--r2", type=float, default=4.0)
    synth.add_argument("--out", required=True, help="output CSV path")
    return parser


def _cmd_render(args) -> int:
    table = load_points(args.input, fmt=args.format)
    outline = load_outline(args.outline) if args.outline else None
    config = Config(segments=args.segments, window=args.window,
                    scale=args.scale, max_width=args.max_width,
                    offset=args.offset, hull_k=args.k,
                    hull_mode="predefined" if outline is not None else args.hull,
                    legend_bins=args.legend_bins, legend_bars=args.legend_bars,
                    legend=not args.no_legend, palette=args.palette,
                    opacity=args.opacity, canvas=args.canvas, dots=args.dots,
                    heat=args.heat, heat_bandwidth=args.heat_bandwidth)
    result = run_pipeline(table, config, outline=outline)
    with open(args.out, "w") as fh:
        fh.write(result.svg)
    logger.info("wrote %s", args.out)
    if args.sidecar:
        with open(args.sidecar, "w") as fh:
            fh.write(sidecar_json(result.sidecar))
        logger.info("wrote %s", args.sidecar)
    return 0


def _cmd_synth(args) -> int:
    table = generate_synthetic(args.kind, args.count, seed=args.seed,
                               series=args.series, time=args.time,
                               low=tuple(args.low), high=tuple(args.high),
                               center=tuple(args.center), sigma=args.sigma,
                               r1=args.r1, r2=args.r2)
    write_points_csv(table, args.out)
    logger.info("wrote %d points to %s", len(table), args.out)
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        if args.command == "render":
            return _cmd_render(args)
        return _cmd_synth(args)
    except INPUT_ERRORS as exc:
        logger.error("%s", exc)
        return 1
    except (PhoenixmapError, ValueError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
