"""End-to-end orchestration: groups, geometry, widths, legends, SVG, sidecar.

The sidecar JSON captures every computed intermediate and the resolved
configuration, so a render can be reproduced byte for byte from it.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .curve import SegmentedCurve, fit_closed_bezier, segment_curve
from .density import (WidthProfile, build_slices, inscribed_circles,
                      scale_widths, smooth_widths)
from .errors import OffsetSelfIntersection
from .geometry import (Outline, PointSet, bbox_diagonal, concave_hull,
                       convex_hull, densify_outline, offset_outline)
from .io import SeriesTable
from .legend import LegendSpec, WidthBar, build_legend
from .render import (GRADIENT_END, GRADIENT_START, PALETTES, DotLayer,
                     RenderSpec, Transform, build_band,
                     render_heat_reference, render_svg)

logger = logging.getLogger("phoenixmap")

HULL_MODES = ("concave", "convex", "predefined")
DEFAULT_OFFSET_FACTOR = 0.02      # offset distance, times data bbox diagonal


@dataclass(frozen=True)
class Config:
    """Pipeline knobs. ``None`` means resolve a default at run time."""

    segments: int = 3000
    window: Optional[int] = None          # default: segments // 10
    scale: Optional[float] = None         # default: auto from max_width
    max_width: float = 30.0               # render units, drives the auto scale
    offset: Optional[float] = None        # default: 0.02 * data bbox diagonal
    hull_k: int = 3
    hull_mode: str = "concave"
    legend_bins: int = 100
    legend_bars: int = 4
    legend: bool = True
    palette: str = "qual6"
    gradient: tuple[str, str] = (GRADIENT_START, GRADIENT_END)
    opacity: float = 0.85
    canvas: tuple[int, int] = (1000, 800)
    margin: float = 40.0
    dots: bool = False
    heat: bool = False
    heat_bandwidth: Optional[float] = None
    seed: int = 0                         # synthetic generators only

    def __post_init__(self):
        if self.segments < 16:
            raise ValueError(f"segments must be >= 16, got {self.segments}")
        if self.window is not None and not 1 <= self.window <= self.segments // 2:
            raise ValueError(f"window {self.window} outside [1, {self.segments // 2}]")
        if self.scale is not None and self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.offset is not None and self.offset <= 0:
            raise ValueError(f"offset must be positive, got {self.offset}")
        if self.hull_mode not in HULL_MODES:
            raise ValueError(f"hull_mode must be one of {HULL_MODES}")
        if self.hull_k < 3:
            raise ValueError(f"hull_k must be >= 3, got {self.hull_k}")

    @property
    def resolved_window(self) -> int:
        return self.window if self.window is not None else max(1, self.segments // 10)


@dataclass(frozen=True)
class GroupResult:
    series: Optional[str]
    time: Optional[str]
    points: PointSet
    outline: Outline
    offset_outline: Outline
    offset: float
    segmented: SegmentedCurve
    centers: np.ndarray
    radii: np.ndarray
    slices: list
    profile: WidthProfile
    legend: Optional[LegendSpec]


@dataclass(frozen=True)
class PipelineResult:
    svg: str
    sidecar: dict
    groups: list


def _outline_for(points: PointSet, config: Config,
                 outline: Optional[Outline]) -> Outline:
    if config.hull_mode == "predefined":
        if outline is None:
            raise ValueError("hull_mode 'predefined' needs an outline")
        return outline
    if config.hull_mode == "convex":
        return convex_hull(points)
    return concave_hull(points, config.hull_k)


def _compute_group(points: PointSet, config: Config,
                   outline: Optional[Outline]) -> GroupResult:
    base = _outline_for(points, config, outline)
    b = config.offset
    if b is None:
        b = DEFAULT_OFFSET_FACTOR * bbox_diagonal(base.vertices)
    # long predefined edges are split so the fitted curve hugs the polygon
    dense = densify_outline(base)
    offset = None
    for attempt in range(8):
        try:
            offset = offset_outline(dense, b)
            break
        except OffsetSelfIntersection:
            # the offset collides with a local feature; shrink and retry
            b *= 0.5
    if offset is None:
        raise OffsetSelfIntersection(
            "outline cannot be offset without self-intersection even at "
            f"{b:.3g}; the hull has a near-degenerate neck")
    if attempt:
        logger.warning("offset shrunk to %.4g to stay self-intersection free", b)
    curve = fit_closed_bezier(offset)
    segmented = segment_curve(curve, config.segments)
    centers, radii = inscribed_circles(segmented)
    slices = build_slices(segmented, (centers, radii), points)
    profile = smooth_widths(slices, config.resolved_window)
    legend = (build_legend(slices, points, profile, config.legend_bins,
                           config.legend_bars)
              if config.legend else None)
    return GroupResult(series=points.series_label, time=points.time_label,
                       points=points, outline=base, offset_outline=offset,
                       offset=b, segmented=segmented, centers=centers,
                       radii=radii, slices=slices, profile=profile,
                       legend=legend)


def _assign_colors(groups: list[GroupResult], config: Config) -> list[tuple[str, str]]:
    """(color, series label) per group; gradient when one series spans times."""
    series = []
    for g in groups:
        if g.series not in series:
            series.append(g.series)
    times = sorted({g.time for g in groups}, key=lambda v: (v is not None, v))
    if len(series) == 1 and len(times) >= 2:
        last = len(times) - 1
        rank = {t: i for i, t in enumerate(times)}
        from .render import lab_lerp
        return [(lab_lerp(config.gradient[0], config.gradient[1],
                          rank[g.time] / last), g.series or "") for g in groups]
    palette = PALETTES[config.palette]
    return [(palette[series.index(g.series) % len(palette)], g.series or "")
            for g in groups]


def run_pipeline(table: SeriesTable, config: Config = Config(),
                 outline: Optional[Outline] = None) -> PipelineResult:
    """Render every (series, time) group of the table into one SVG + sidecar.

    Groups with fewer than 3 points are skipped with a warning. Widths share
    one scale across groups so overlaid bands stay comparable.
    """
    groups: list[GroupResult] = []
    for series, time in table.group_keys():
        pts = table.group(series, time)
        if len(pts) < 3:
            logger.warning("skipping group (series=%r, time=%r): "
                           "only %d point(s)", series, time, len(pts))
            continue
        try:
            groups.append(_compute_group(pts, config, outline))
        except Exception as exc:
            raise type(exc)(f"group (series={series!r}, time={time!r}): {exc}") \
                from exc
    if not groups:
        raise ValueError("no group has the 3 points required for an outline")

    all_pts = np.vstack([g.offset_outline.vertices for g in groups])
    bbox = (*all_pts.min(axis=0), *all_pts.max(axis=0))
    transform = Transform.fit(bbox, config.canvas[0], config.canvas[1],
                              config.margin)

    peak = max(float(g.profile.smoothed.max(initial=0.0)) for g in groups)
    if config.scale is not None:
        resolved_scale = config.scale
    else:
        resolved_scale = config.max_width / peak if peak > 0 else 1.0

    colors = _assign_colors(groups, config)
    bands = []
    legends = []
    dots = []
    heats = []
    for g, (color, _) in zip(groups, colors):
        scaled = scale_widths(g.profile, resolved_scale)
        bands.append(build_band(g.segmented, scaled, radii=g.radii,
                                px_per_unit=transform.scale, color=color,
                                opacity=config.opacity, series=g.series,
                                time=g.time))
        if g.legend is not None:
            scaled_bars = [WidthBar(width=b.density * resolved_scale,
                                    density=b.density, label=b.label)
                           for b in g.legend.width_bars]
            legends.append((LegendSpec(radial_profile=g.legend.radial_profile,
                                       width_bars=scaled_bars),
                            _group_title(g), color))
        if config.dots:
            dots.append(DotLayer(points=g.points.points, color=color))
        if config.heat:
            bw = config.heat_bandwidth
            if bw is None:
                bw = 0.05 * bbox_diagonal(g.points.points)
            heats.append(render_heat_reference(g.points, bw))

    spec = RenderSpec(width=config.canvas[0], height=config.canvas[1],
                      transform=transform, palette=config.palette)
    svg = render_svg(spec, bands, legends=legends, dots=dots, heat=heats)
    sidecar = _build_sidecar(config, transform, groups, colors, resolved_scale)
    return PipelineResult(svg=svg, sidecar=sidecar, groups=groups)


def _group_title(g: GroupResult) -> str:
    parts = [p for p in (g.series, g.time) if p]
    return " / ".join(parts)


def _build_sidecar(config: Config, transform: Transform,
                   groups: list[GroupResult], colors, resolved_scale) -> dict:
    cfg = {
        "segments": config.segments,
        "window": config.resolved_window,
        "scale": resolved_scale,
        "max_width": config.max_width,
        "offset": config.offset,
        "hull_k": config.hull_k,
        "hull_mode": config.hull_mode,
        "legend_bins": config.legend_bins,
        "legend_bars": config.legend_bars,
        "legend": config.legend,
        "palette": config.palette,
        "gradient": list(config.gradient),
        "opacity": config.opacity,
        "canvas": list(config.canvas),
        "margin": config.margin,
        "dots": config.dots,
        "heat": config.heat,
        "heat_bandwidth": config.heat_bandwidth,
        "seed": config.seed,
    }
    out_groups = []
    for g, (color, _) in zip(groups, colors):
        entry = {
            "series": g.series,
            "time": g.time,
            "color": color,
            "opacity": config.opacity,
            "outline": g.outline.vertices.tolist(),
            "offset_outline": g.offset_outline.vertices.tolist(),
            "offset": g.offset,
            "divisors": g.segmented.n,
            "raw_widths": g.profile.raw.tolist(),
            "smoothed_widths": g.profile.smoothed.tolist(),
            "slice_counts": [s.count for s in g.slices],
            "slice_areas": [s.area for s in g.slices],
            "points_inside": int(sum(s.count for s in g.slices)),
            "legend": None,
        }
        if g.legend is not None:
            entry["legend"] = {
                "radial_profile": np.asarray(g.legend.radial_profile).tolist(),
                "width_bars": [{"width": b.density * resolved_scale,
                                "density": b.density, "label": b.label}
                               for b in g.legend.width_bars],
                "units": g.legend.units_name,
            }
        if config.dots or config.heat:
            entry["points"] = g.points.points.tolist()
        out_groups.append(entry)
    return {
        "tool": "phoenixmap",
        "version": __version__,
        "config": cfg,
        "transform": {"scale": transform.scale, "tx": transform.tx,
                      "ty": transform.ty},
        "groups": out_groups,
    }


def sidecar_json(sidecar: dict) -> str:
    return json.dumps(sidecar, indent=2, ensure_ascii=False) + "\n"


def render_from_sidecar(sidecar: dict) -> str:
    """Reproduce the SVG from a sidecar alone (geometry is re-derived)."""
    cfg = sidecar["config"]
    t = sidecar["transform"]
    transform = Transform(scale=t["scale"], tx=t["tx"], ty=t["ty"])
    bands = []
    legends = []
    dots = []
    heats = []
    for entry in sidecar["groups"]:
        offset = Outline(np.asarray(entry["offset_outline"], dtype=float))
        curve = fit_closed_bezier(offset)
        segmented = segment_curve(curve, cfg["segments"])
        _, radii = inscribed_circles(segmented)
        profile = WidthProfile(raw=np.asarray(entry["raw_widths"], dtype=float),
                               smoothed=np.asarray(entry["smoothed_widths"],
                                                   dtype=float),
                               window=cfg["window"], scale=cfg["scale"])
        bands.append(build_band(segmented, profile, radii=radii,
                                px_per_unit=transform.scale,
                                color=entry["color"], opacity=entry["opacity"],
                                series=entry["series"], time=entry["time"]))
        if entry.get("legend"):
            leg = entry["legend"]
            spec = LegendSpec(
                radial_profile=np.asarray(leg["radial_profile"], dtype=float),
                width_bars=[WidthBar(width=b["width"], density=b["density"],
                                     label=b["label"])
                            for b in leg["width_bars"]],
                units_name=leg["units"])
            title = " / ".join(p for p in (entry["series"], entry["time"]) if p)
            legends.append((spec, title, entry["color"]))
        if cfg["dots"] and "points" in entry:
            dots.append(DotLayer(points=np.asarray(entry["points"], dtype=float),
                                 color=entry["color"]))
        if cfg["heat"] and "points" in entry:
            pts = PointSet(points=np.asarray(entry["points"], dtype=float))
            bw = cfg["heat_bandwidth"]
            if bw is None:
                bw = 0.05 * bbox_diagonal(pts.points)
            heats.append(render_heat_reference(pts, bw))
    spec = RenderSpec(width=cfg["canvas"][0], height=cfg["canvas"][1],
                      transform=transform, palette=cfg["palette"])
    return render_svg(spec, bands, legends=legends, dots=dots, heat=heats)
