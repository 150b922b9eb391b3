"""Deterministic SVG rendering of variable-width bands, dots, heat and legends.

The variable-width stroke is realized as a single filled region between the
curve and its per-divisor inward offset, which keeps only the inner half of
the stroke by construction. All numbers are written with fixed 3-decimal
precision so identical inputs give byte-identical documents.
"""

from __future__ import annotations

import base64
import struct
import zlib
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .curve import SegmentedCurve
from .density import WidthProfile
from .errors import EmptyScene
from .geometry import PointSet, as_coords

PALETTES = {
    "qual6": ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"],
}

#: default endpoints of the time-gradient ramp (dark brown to red)
GRADIENT_START = "#5b3a29"
GRADIENT_END = "#e0391e"

WIDTH_CLAMP = 0.95            # widths are capped at this fraction of the local radius
DOT_RADIUS = 1.6              # render units


def fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


# ---------------------------------------------------------------------------
# color handling

def _hex_to_rgb(color: str) -> tuple[float, float, float]:
    c = color.lstrip("#")
    if len(c) != 6:
        raise ValueError(f"expected #rrggbb color, got {color!r}")
    return tuple(int(c[i:i + 2], 16) / 255.0 for i in (0, 2, 4))


def _rgb_to_hex(rgb) -> str:
    return "#" + "".join(f"{int(round(np.clip(v, 0.0, 1.0) * 255)):02x}" for v in rgb)


_RGB_TO_XYZ = np.array([[0.4124564, 0.3575761, 0.1804375],
                        [0.2126729, 0.7151522, 0.0721750],
                        [0.0193339, 0.1191920, 0.9503041]])
_WHITE = np.array([0.95047, 1.0, 1.08883])


def _to_lab(rgb) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=float)
    lin = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = _RGB_TO_XYZ @ lin / _WHITE
    f = np.where(xyz > (6 / 29) ** 3, np.cbrt(xyz), xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    return np.array([116 * f[1] - 16, 500 * (f[0] - f[1]), 200 * (f[1] - f[2])])


def _from_lab(lab) -> np.ndarray:
    L, a, b = lab
    fy = (L + 16) / 116
    f = np.array([fy + a / 500, fy, fy - b / 200])
    xyz = np.where(f > 6 / 29, f ** 3, 3 * (6 / 29) ** 2 * (f - 4 / 29)) * _WHITE
    lin = np.linalg.solve(_RGB_TO_XYZ, xyz)
    return np.where(lin <= 0.0031308, 12.92 * lin,
                    1.055 * np.maximum(lin, 0.0) ** (1 / 2.4) - 0.055)


def lab_lerp(color_a: str, color_b: str, t: float) -> str:
    """Perceptual interpolation between two hex colors in CIELAB."""
    if t <= 0:
        return color_a
    if t >= 1:
        return color_b
    la = _to_lab(_hex_to_rgb(color_a))
    lb = _to_lab(_hex_to_rgb(color_b))
    return _rgb_to_hex(_from_lab(la + t * (lb - la)))


# ---------------------------------------------------------------------------
# minimal deterministic PNG writer (RGBA, no filtering)

def encode_png_rgba(img: np.ndarray) -> bytes:
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 4:
        raise ValueError("expected (h, w, 4) uint8 image")
    h, w = img.shape[:2]
    raw = b"".join(b"\x00" + img[row].tobytes() for row in range(h))

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 6, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b""))


# ---------------------------------------------------------------------------
# scene model

@dataclass(frozen=True)
class Transform:
    """Uniform map-to-canvas transform with the y axis flipped for SVG."""

    scale: float
    tx: float
    ty: float

    def __post_init__(self):
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError(f"transform scale must be positive, got {self.scale}")

    def apply(self, coords) -> np.ndarray:
        pts = as_coords(coords)
        return np.column_stack([self.scale * pts[:, 0] + self.tx,
                                -self.scale * pts[:, 1] + self.ty])

    @classmethod
    def fit(cls, bbox, width: float, height: float, margin: float = 40.0) -> "Transform":
        xmin, ymin, xmax, ymax = bbox
        span_x = max(xmax - xmin, 1e-12)
        span_y = max(ymax - ymin, 1e-12)
        scale = min((width - 2 * margin) / span_x, (height - 2 * margin) / span_y)
        tx = margin - scale * xmin + 0.5 * ((width - 2 * margin) - scale * span_x)
        ty = height - margin + scale * ymin - 0.5 * ((height - 2 * margin) - scale * span_y)
        return cls(scale=scale, tx=tx, ty=ty)


@dataclass(frozen=True)
class PhoenixBand:
    """One distribution's band: outer samples on the curve, inner offset points."""

    outer: np.ndarray
    inner: np.ndarray
    color: str = PALETTES["qual6"][0]
    opacity: float = 0.85
    series: Optional[str] = None
    time: Optional[str] = None


@dataclass(frozen=True)
class DotLayer:
    points: np.ndarray
    color: str = "#333333"
    radius: float = DOT_RADIUS
    opacity: float = 0.8


@dataclass(frozen=True)
class HeatLayer:
    values: np.ndarray                      # (gy, gx), row 0 = top (max y)
    extent: tuple[float, float, float, float]   # xmin, ymin, xmax, ymax
    colors: tuple[str, str] = ("#0000ff", "#ff0000")
    opacity: float = 0.6


@dataclass(frozen=True)
class RenderSpec:
    width: float
    height: float
    transform: Transform
    background: Optional[str] = None
    palette: str = "qual6"
    layer_order: tuple[str, ...] = ("heat", "bands", "dots", "legend")


def build_band(curve: SegmentedCurve, widths: WidthProfile,
               radii: Optional[np.ndarray] = None, px_per_unit: float = 1.0,
               color: str = PALETTES["qual6"][0], opacity: float = 0.85,
               series: Optional[str] = None, time: Optional[str] = None) -> PhoenixBand:
    """Band between the curve and its inward offset by the profile widths.

    ``widths.widths`` are render units; ``px_per_unit`` converts them into
    map units. When inscribed-circle radii are given, widths are clamped to
    0.95 of the local radius so the inner boundary cannot cross the curve.
    """
    n = curve.n
    if len(widths.smoothed) != n:
        raise ValueError(f"profile length {len(widths.smoothed)} != {n} segments")
    w_map = np.maximum(widths.widths, 0.0) / px_per_unit
    if radii is not None:
        w_map = np.minimum(w_map, WIDTH_CLAMP * np.asarray(radii, dtype=float))
    inner = curve.divisors + w_map[:, None] * curve.inward_normals
    return PhoenixBand(outer=curve.divisors.copy(), inner=inner, color=color,
                       opacity=opacity, series=series, time=time)


def render_time_gradient(bands_by_time: Sequence[PhoenixBand],
                         start: str = GRADIENT_START,
                         end: str = GRADIENT_END) -> list[PhoenixBand]:
    """Restyle bands on a perceptual ramp by time label, earliest first.

    The earliest step gets the start color, the latest the end color, and
    the returned draw order puts the latest step on top.
    """
    if len(bands_by_time) < 2:
        raise ValueError("time gradient needs at least 2 time steps")
    ordered = sorted(bands_by_time, key=lambda b: (b.time is None, b.time))
    last = len(ordered) - 1
    return [replace(b, color=lab_lerp(start, end, i / last))
            for i, b in enumerate(ordered)]


def render_heat_reference(points: PointSet, bandwidth: float, grid: int = 256,
                          extent: Optional[tuple] = None,
                          opacity: float = 0.6) -> HeatLayer:
    """Gaussian kernel density rasterized on a regular grid, blue-to-red.

    The raster integrates to the point count (up to the 4-sigma margin
    truncation) because each kernel carries a 1/(2 pi sigma^2) weight.
    """
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    pts = points.points
    if extent is None:
        pad = 4.0 * bandwidth
        xmin, ymin = pts.min(axis=0) - pad
        xmax, ymax = pts.max(axis=0) + pad
    else:
        xmin, ymin, xmax, ymax = extent
    xs = xmin + (np.arange(grid) + 0.5) * (xmax - xmin) / grid
    ys = ymin + (np.arange(grid) + 0.5) * (ymax - ymin) / grid
    inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth)
    gx = np.exp(-((xs[:, None] - pts[None, :, 0]) ** 2) * inv2s2)   # (gx, N)
    gy = np.exp(-((ys[:, None] - pts[None, :, 1]) ** 2) * inv2s2)   # (gy, N)
    values = (gy @ gx.T) / (2.0 * np.pi * bandwidth * bandwidth)    # (gy, gx)
    return HeatLayer(values=values[::-1], extent=(xmin, ymin, xmax, ymax),
                     opacity=opacity)


def _heat_png(layer: HeatLayer) -> bytes:
    v = layer.values
    peak = v.max()
    t = v / peak if peak > 0 else np.zeros_like(v)
    lo = np.array(_hex_to_rgb(layer.colors[0]))
    hi = np.array(_hex_to_rgb(layer.colors[1]))
    rgb = lo[None, None, :] + t[:, :, None] * (hi - lo)[None, None, :]
    img = np.empty((*v.shape, 4), dtype=np.uint8)
    img[..., :3] = np.round(rgb * 255).astype(np.uint8)
    img[..., 3] = np.round(np.sqrt(t) * 255).astype(np.uint8)
    return encode_png_rgba(img)


def _path_from_rings(rings: Sequence[np.ndarray]) -> str:
    parts = []
    for ring in rings:
        coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in ring)
        parts.append(f"M {coords} Z")
    return " ".join(parts)


def _sanitize_id(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in text)


def _band_elements(spec: RenderSpec, bands: Sequence[PhoenixBand]) -> list[str]:
    out = []
    for i, band in enumerate(bands):
        outer = spec.transform.apply(band.outer)
        inner = spec.transform.apply(band.inner)
        d = _path_from_rings([outer, inner[::-1]])
        label = band.series or "band"
        if band.time:
            label = f"{label}-{band.time}"
        out.append(f'<path id="band-{i}-{_sanitize_id(label)}" d="{d}" '
                   f'fill="{band.color}" fill-opacity="{fmt(band.opacity)}" '
                   f'fill-rule="evenodd" stroke="none"/>')
    return out


def _dot_elements(spec: RenderSpec, dots: Sequence[DotLayer]) -> list[str]:
    out = []
    for layer in dots:
        pts = spec.transform.apply(layer.points)
        circles = "".join(
            f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(layer.radius)}"/>'
            for x, y in pts)
        out.append(f'<g fill="{layer.color}" fill-opacity="{fmt(layer.opacity)}">'
                   f'{circles}</g>')
    return out


def _heat_elements(spec: RenderSpec, layers: Sequence[HeatLayer]) -> list[str]:
    out = []
    for layer in layers:
        xmin, ymin, xmax, ymax = layer.extent
        top_left = spec.transform.apply([[xmin, ymax]])[0]
        w = spec.transform.scale * (xmax - xmin)
        h = spec.transform.scale * (ymax - ymin)
        payload = base64.b64encode(_heat_png(layer)).decode("ascii")
        out.append(f'<image x="{fmt(top_left[0])}" y="{fmt(top_left[1])}" '
                   f'width="{fmt(w)}" height="{fmt(h)}" '
                   f'opacity="{fmt(layer.opacity)}" '
                   f'preserveAspectRatio="none" '
                   f'xlink:href="data:image/png;base64,{payload}"/>')
    return out


LEGEND_BOX_W = 46.0
LEGEND_BOX_H = 110.0
LEGEND_BAR_LEN = 56.0
LEGEND_GAP = 14.0


def _legend_elements(spec: RenderSpec, legends: Sequence[tuple],
                     ) -> list[str]:
    """Each entry is (LegendSpec, title, color). Boxes stack down the right edge."""
    out = []
    x0 = spec.width - LEGEND_BOX_W - LEGEND_BAR_LEN - 3 * LEGEND_GAP
    y = LEGEND_GAP
    for legend, title, color in legends:
        parts = [f'<g font-family="sans-serif" font-size="10">']
        if title:
            parts.append(f'<text x="{fmt(x0)}" y="{fmt(y + 8)}" '
                         f'fill="#222222">{title}</text>')
        box_y = y + 14
        profile = np.asarray(legend.radial_profile, dtype=float)
        peak = profile.max() if len(profile) else 0.0
        row_h = LEGEND_BOX_H / max(len(profile), 1)
        for j, value in enumerate(profile):
            shade = value / peak if peak > 0 else 0.0
            gray = int(round(245 - 215 * shade))
            parts.append(f'<rect x="{fmt(x0)}" y="{fmt(box_y + j * row_h)}" '
                         f'width="{fmt(LEGEND_BOX_W)}" height="{fmt(row_h + 0.5)}" '
                         f'fill="#{gray:02x}{gray:02x}{gray:02x}"/>')
        parts.append(f'<rect x="{fmt(x0)}" y="{fmt(box_y)}" '
                     f'width="{fmt(LEGEND_BOX_W)}" height="{fmt(LEGEND_BOX_H)}" '
                     f'fill="none" stroke="#555555" stroke-width="0.7"/>')
        parts.append(f'<text x="{fmt(x0 + LEGEND_BOX_W + 4)}" y="{fmt(box_y + 8)}" '
                     f'fill="#555555">center</text>')
        parts.append(f'<text x="{fmt(x0 + LEGEND_BOX_W + 4)}" '
                     f'y="{fmt(box_y + LEGEND_BOX_H)}" fill="#555555">edge</text>')
        bar_y = box_y + LEGEND_BOX_H + LEGEND_GAP
        for bar in legend.width_bars:
            parts.append(f'<line x1="{fmt(x0)}" y1="{fmt(bar_y)}" '
                         f'x2="{fmt(x0 + LEGEND_BAR_LEN)}" y2="{fmt(bar_y)}" '
                         f'stroke="{color}" stroke-width="{fmt(max(bar.width, 0.5))}"/>')
            parts.append(f'<text x="{fmt(x0 + LEGEND_BAR_LEN + 6)}" '
                         f'y="{fmt(bar_y + 3.5)}" fill="#222222">{bar.label}</text>')
            bar_y += max(bar.width, 4.0) + 9.0
        parts.append("</g>")
        out.append("".join(parts))
        y = bar_y + LEGEND_GAP
    return out


def render_svg(spec: RenderSpec, bands: Sequence[PhoenixBand],
               legends: Optional[Sequence[tuple]] = None,
               dots: Optional[Sequence[DotLayer]] = None,
               heat: Optional[Sequence[HeatLayer]] = None) -> str:
    """Assemble the SVG 1.1 document. Element order follows the input order."""
    bands = list(bands or [])
    legends = list(legends or [])
    dots = list(dots or [])
    heat = list(heat or [])
    if not (bands or legends or dots or heat):
        raise EmptyScene("nothing to render")
    if spec.palette not in PALETTES:
        raise ValueError(f"unknown palette {spec.palette!r}; "
                         f"available: {sorted(PALETTES)}")
    w, h = fmt(spec.width), fmt(spec.height)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" '
             f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    if spec.background:
        lines.append(f'<rect x="0" y="0" width="{w}" height="{h}" '
                     f'fill="{spec.background}"/>')
    emitters = {
        "heat": lambda: _heat_elements(spec, heat),
        "bands": lambda: _band_elements(spec, bands),
        "dots": lambda: _dot_elements(spec, dots),
        "legend": lambda: _legend_elements(spec, legends),
    }
    for name in spec.layer_order:
        lines.extend(emitters[name]())
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
