#!/usr/bin/env python3
"""Stage-by-stage timing of the pipeline on a synthetic dataset."""

import argparse
import time

from phoenixmap.curve import fit_closed_bezier, segment_curve
from phoenixmap.density import (build_slices, inscribed_circles, scale_widths,
                                smooth_widths)
from phoenixmap.errors import OffsetSelfIntersection
from phoenixmap.geometry import (bbox_diagonal, concave_hull, densify_outline,
                                 offset_outline)
from phoenixmap.io import generate_synthetic
from phoenixmap.pipeline import Config, run_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10_000)
    parser.add_argument("--segments", type=int, default=3000)
    parser.add_argument("--k", type=int, default=40)
    parser.add_argument("--kind", default="mixture")
    parser.add_argument("--seed", type=int, default=9)
    args = parser.parse_args()

    table = generate_synthetic(args.kind, args.count, seed=args.seed)
    points = table.group(None, None)

    marks = [("start", time.perf_counter())]

    def mark(name):
        marks.append((name, time.perf_counter()))

    hull = concave_hull(points, args.k)
    mark("concave hull")
    b = 0.02 * bbox_diagonal(hull.vertices)
    dense = densify_outline(hull)
    while True:
        try:
            offset = offset_outline(dense, b)
            break
        except OffsetSelfIntersection:
            b *= 0.5
    mark("offset")
    curve = fit_closed_bezier(offset)
    mark("spline fit")
    seg = segment_curve(curve, args.segments)
    mark("segmentation")
    circles = inscribed_circles(seg)
    mark("inscribed circles")
    slices = build_slices(seg, circles, points)
    mark("slices + counting")
    profile = scale_widths(smooth_widths(slices, args.segments // 10))
    mark("smooth + scale")

    for (_, t0), (name, t1) in zip(marks, marks[1:]):
        print(f"{name:18s} {t1 - t0:7.3f}s")
    print(f"{'stages total':18s} {marks[-1][1] - marks[0][1]:7.3f}s")

    t0 = time.perf_counter()
    run_pipeline(table, Config(segments=args.segments, hull_k=args.k))
    print(f"{'full pipeline':18s} {time.perf_counter() - t0:7.3f}s "
          f"(incl. legend + svg)")


if __name__ == "__main__":
    main()
