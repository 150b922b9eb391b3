"""Radial density profile and width-scale reference bars for legends."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .density import SegmentSlice, WidthProfile
from .geometry import PointSet

#: factors of ten considered "round" steps for bar labels
NICE_STEPS = (1.0, 2.0, 2.5, 5.0)


@dataclass(frozen=True)
class WidthBar:
    width: float      # render units, density * scale
    density: float    # points per square unit
    label: str


@dataclass(frozen=True)
class LegendSpec:
    """Radial profile (index 0 = center side) plus width reference bars."""

    radial_profile: np.ndarray
    width_bars: list[WidthBar] = field(default_factory=list)
    units_name: str = "SQU"


def _format_density(v: float) -> str:
    return f"{v:g}"


def _inverse_bilinear_fraction(p, o0, o1, v0, v1) -> np.ndarray:
    """Fraction f in [0, 1] from the o-edge (0) to the v-edge (1) per point.

    Solves the quadratic cross((p - A(f)), (B(f) - A(f))) = 0 with rails
    A(f) = o0 + f (v0 - o0) and B(f) = o1 + f (v1 - o1); when two roots are
    feasible the one whose along-rail coordinate best fits [0, 1] wins.
    """
    a1 = v0 - o0
    pp = p - o0
    q = o1 - o0
    r = (v1 - o1) - a1

    def cross(u, w):
        return u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]

    c0 = cross(pp, q)
    c1 = cross(pp, r) - cross(a1, q)
    c2 = -cross(a1, r)

    with np.errstate(divide="ignore", invalid="ignore"):
        lin = np.where(np.abs(c1) > 0, -c0 / c1, 0.5)
        disc = c1 * c1 - 4.0 * c2 * c0
        sq = np.sqrt(np.maximum(disc, 0.0))
        fa = (-c1 + sq) / (2.0 * c2)
        fb = (-c1 - sq) / (2.0 * c2)
    quadratic = np.abs(c2) > 1e-30
    fa = np.where(quadratic, fa, lin)
    fb = np.where(quadratic, fb, lin)

    def badness(f):
        # distance of (f, s) to the unit box, s recovered by projection
        fc = np.clip(f, -10.0, 10.0)
        a = o0 + fc[:, None] * a1
        b = o1 + fc[:, None] * (v1 - o1)
        ab = b - a
        len2 = np.einsum("nd,nd->n", ab, ab)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(len2 > 0, np.einsum("nd,nd->n", p - a, ab) / len2, 0.5)
        df = np.maximum(np.maximum(-fc, fc - 1.0), 0.0)
        ds = np.maximum(np.maximum(-s, s - 1.0), 0.0)
        return df + ds

    f = np.where(badness(fa) <= badness(fb), fa, fb)
    return np.clip(np.nan_to_num(f, nan=0.5), 0.0, 1.0)


def radial_profile(slices: Sequence[SegmentSlice], points: PointSet,
                   m: int = 100) -> np.ndarray:
    """Aggregate density of m radial sub-sections, center side first.

    Every slice quad is cut into m sub-quads by linear interpolation
    between its o-edge and v-edge; bin j is the total count over all
    slices' j-th sub-quads divided by their total area.
    """
    if m < 2:
        raise ValueError(f"need at least 2 radial bins, got {m}")
    quads = np.asarray([s.quad for s in slices])
    v0, v1, o1, o0 = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]

    # sub-quad areas: rails sampled at m+1 fractions, shoelace per cell
    f = np.linspace(0.0, 1.0, m + 1)
    left = o0[:, None, :] + f[None, :, None] * (v0 - o0)[:, None, :]
    right = o1[:, None, :] + f[None, :, None] * (v1 - o1)[:, None, :]

    def cross(u, w):
        return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]

    # cell (i, j): corners left[j], right[j], right[j+1], left[j+1]
    a, b = left[:, :-1], right[:, :-1]
    c, d = right[:, 1:], left[:, 1:]
    cell_areas = 0.5 * np.abs(cross(b - a, c - a) + cross(c - a, d - a))
    bin_areas = cell_areas.sum(axis=0)

    assign = np.concatenate([np.full(len(s.point_indices), s.index, dtype=int)
                             for s in slices]) if slices else np.empty(0, int)
    rows = np.concatenate([s.point_indices for s in slices]) if slices else np.empty(0, int)
    if len(rows):
        p = points.points[rows]
        frac = _inverse_bilinear_fraction(p, o0[assign], o1[assign],
                                          v0[assign], v1[assign])
        bins = np.minimum((frac * m).astype(int), m - 1)
        bin_counts = np.bincount(bins, minlength=m)
    else:
        bin_counts = np.zeros(m, dtype=int)

    with np.errstate(divide="ignore", invalid="ignore"):
        profile = np.where(bin_areas > 0, bin_counts / bin_areas, 0.0)
    return profile


def width_bars(profile: WidthProfile, count: int = 4) -> list[WidthBar]:
    """Reference bars at round-number densities spanning up to the peak density.

    The step is the smallest value from {1, 2, 2.5, 5} x 10^k with at most
    ``count`` multiples below the peak, so for a peak of 100 and count 4 the
    labels are 25, 50, 75, 100.
    """
    if count < 1:
        raise ValueError(f"need at least one bar, got {count}")
    peak = float(profile.smoothed.max(initial=0.0))
    if peak <= 0:
        return [WidthBar(width=0.0, density=0.0, label="0 P / SQU")]
    target = peak / count
    exp = np.floor(np.log10(target)) if target > 0 else 0.0
    step = None
    for e in (exp, exp + 1, exp + 2):
        for s in NICE_STEPS:
            cand = s * 10.0 ** e
            if cand >= target * (1.0 - 1e-9):
                step = cand
                break
        if step is not None:
            break
    n_bars = max(1, int(np.floor(peak / step + 1e-9)))
    bars = []
    for j in range(1, n_bars + 1):
        density = j * step
        bars.append(WidthBar(width=density * profile.scale, density=density,
                             label=f"{_format_density(density)} P / SQU"))
    return bars


def build_legend(slices: Sequence[SegmentSlice], points: PointSet,
                 profile: WidthProfile, bins: int = 100,
                 bar_count: int = 4) -> LegendSpec:
    return LegendSpec(radial_profile=radial_profile(slices, points, bins),
                      width_bars=width_bars(profile, bar_count))
