"""Per-segment interior slices, point counting, density smoothing and scaling.

Each divisor point gets the largest interior circle tangent to the curve
there; adjacent divisors and circle centers bound a quadrilateral slice.
Slice densities are smoothed with an area-weighted circular sliding window
and scaled into stroke widths.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .curve import SegmentedCurve
from .errors import BadWindow, DegenerateNormal, NonPositiveScale
from .geometry import Outline, PointSet, bbox_diagonal, points_in_polygon

INSCRIBED_TOL_FACTOR = 1e-6   # radius tolerance, times bbox diagonal
AREA_FLOOR_FACTOR = 1e-6      # degenerate slice area floor factor


@dataclass(frozen=True)
class InscribedCircle:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class SegmentSlice:
    """Counting cell for one curve segment.

    ``quad`` holds (v_i, v_{i+1}, o_{i+1}, o_i); ``point_indices`` are the
    rows of the input point set assigned to this slice.
    """

    index: int
    quad: np.ndarray
    area: float
    count: int
    density: float
    point_indices: np.ndarray


@dataclass(frozen=True)
class WidthProfile:
    """Raw and smoothed slice densities plus the width scale factor.

    ``smoothed`` stays in density units; rendered widths are
    ``smoothed * scale`` (the ``widths`` property).
    """

    raw: np.ndarray
    smoothed: np.ndarray
    window: int
    scale: float = 1.0

    @property
    def widths(self) -> np.ndarray:
        return self.smoothed * self.scale

    def __len__(self):
        return len(self.raw)


CHORD_EXCLUSION = 800   # chords this close (in samples) to the tangency are skipped


def _tangent_radii(samples: np.ndarray, origins: np.ndarray,
                   normals: np.ndarray, center_idx: Optional[np.ndarray] = None,
                   chunk: int = 128) -> np.ndarray:
    """Largest tangent-circle radius per origin along its inward normal.

    A boundary point q constrains the circle centered at v + t*n through v
    to t <= f(q) = |q - v|^2 / (2 n.(q - v)) when n.(q - v) > 0. The radius
    is the minimum of f over the closed polyline of on-curve samples; per
    chord the minimum sits at an endpoint (the vertex pass) or at a root of
    the quadratic c2*e1*s^2 + 2*c2*e0*s + (2*c1*e0 - c0*e1) from f'(s) = 0,
    so thin necks between samples cannot be jumped over.

    Chord interiors undercut the smooth curve near the tangency point (a
    circle through a polyline corner always crosses its edges), so when
    ``center_idx`` gives each origin's own sample position, chords within
    CHORD_EXCLUSION samples of it are skipped; on-curve vertex constraints
    still cover that arc, and a genuine neck is arc-far by nature.
    """
    m = len(samples)
    a = samples
    d = np.roll(samples, -1, axis=0) - a
    c2 = np.einsum("md,md->m", d, d)
    ad = np.einsum("md,md->m", a, d)
    anorm2 = np.einsum("md,md->m", a, a)
    eps = 1e-15 * max(bbox_diagonal(samples), 1.0)
    window = min(max(CHORD_EXCLUSION, m // 8), m // 4)
    cols = np.arange(m)
    out = np.empty(len(origins))
    for lo in range(0, len(origins), chunk):
        v = origins[lo:lo + chunk]
        nrm = normals[lo:lo + chunk]
        e1 = nrm @ d.T
        e0 = nrm @ a.T - np.einsum("cd,cd->c", nrm, v)[:, None]
        c1 = ad[None, :] - v @ d.T
        c0 = anorm2[None, :] - 2.0 * (v @ a.T) + np.einsum("cd,cd->c", v, v)[:, None]

        # vertex constraints (chord endpoints, s = 0)
        f = np.full_like(e0, np.inf)
        np.divide(c0, 2.0 * e0, out=f, where=e0 > eps)
        best = f.min(axis=1)

        allowed = True
        if center_idx is not None:
            ks = center_idx[lo:lo + chunk]
            dist = np.abs((cols[None, :] - ks[:, None] + m // 2) % m - m // 2)
            allowed = dist > window

        # interior critical points via the stable quadratic root pair
        A = c2[None, :] * e1
        B = 2.0 * c2[None, :] * e0
        C = 2.0 * c1 * e0 - c0 * e1
        disc = B * B - 4.0 * A * C
        real = disc >= 0.0
        if center_idx is not None:
            real = real & allowed
        sqrt_disc = np.sqrt(np.where(disc >= 0.0, disc, 0.0))
        q = -0.5 * (B + np.where(B >= 0.0, 1.0, -1.0) * sqrt_disc)
        for num, den in ((q, A), (C, q)):
            s = np.full_like(q, -1.0)
            np.divide(num, den, out=s, where=den != 0.0)
            inside = real & (s > 0.0) & (s < 1.0)
            D = 2.0 * (e0 + e1 * s)
            N = c0 + (2.0 * c1 + c2[None, :] * s) * s
            fcrit = np.full_like(q, np.inf)
            np.divide(N, D, out=fcrit, where=inside & (D > eps))
            best = np.minimum(best, fcrit.min(axis=1))
        out[lo:lo + chunk] = best
    return out


def _sample_indices(curve: SegmentedCurve) -> np.ndarray:
    m = len(curve.samples)
    return np.rint(curve.arc_positions / curve.length * m).astype(int) % m


def inscribed_circles(curve: SegmentedCurve) -> tuple[np.ndarray, np.ndarray]:
    """Centers (n, 2) and radii (n,) of the tangent circles at every divisor."""
    diag = bbox_diagonal(curve.flat)
    tol = INSCRIBED_TOL_FACTOR * diag
    radii = _tangent_radii(curve.samples, curve.divisors, curve.inward_normals,
                           center_idx=_sample_indices(curve))
    bad = ~np.isfinite(radii) | (radii <= tol)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DegenerateNormal(
            f"inward normal at divisor {i} exits the region immediately "
            f"(radius {radii[i]:.3g}); the shape has a near-zero-width neck")
    centers = curve.divisors + radii[:, None] * curve.inward_normals
    return centers, radii


def inscribed_circle_at(curve: SegmentedCurve, i: int,
                        boundary: Optional[Outline] = None) -> InscribedCircle:
    """Largest circle tangent to the curve at divisor ``i`` that stays inside.

    ``boundary``, when given, is used for an extra probe check that the
    normal actually enters the region.
    """
    n = curve.n
    if not 0 <= i < n:
        raise IndexError(f"divisor index {i} out of range [0, {n})")
    diag = bbox_diagonal(curve.flat)
    tol = INSCRIBED_TOL_FACTOR * diag
    if boundary is not None:
        probe = curve.divisors[i] + tol * curve.inward_normals[i]
        if not points_in_polygon(probe[None, :], boundary.vertices)[0]:
            raise DegenerateNormal(
                f"inward normal probe at divisor {i} exits the boundary")
    radius = _tangent_radii(curve.samples, curve.divisors[i:i + 1],
                            curve.inward_normals[i:i + 1],
                            center_idx=_sample_indices(curve)[i:i + 1])[0]
    if not np.isfinite(radius) or radius <= tol:
        raise DegenerateNormal(
            f"inward normal at divisor {i} exits the region immediately "
            f"(radius {radius:.3g}); the shape has a near-zero-width neck")
    center = curve.divisors[i] + radius * curve.inward_normals[i]
    return InscribedCircle(center=center, radius=float(radius))


def _quad_areas(quads: np.ndarray) -> np.ndarray:
    """Areas of (v0, v1, o1, o0) quads; crossed quads split into two triangles."""
    v0, v1, o1, o0 = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]
    a = v1 - v0
    b = o1 - v0
    c = o0 - v0
    t1 = 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])    # (v0, v1, o1)
    t2 = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])    # (v0, o1, o0)
    crossed = t1 * t2 < 0
    return np.where(crossed, np.abs(t1) + np.abs(t2), np.abs(t1 + t2))


def _first_quad_match(quads: np.ndarray, pts: np.ndarray,
                      block: int = 256) -> np.ndarray:
    """Index of the first quad containing each point (even-odd), -1 if none.

    Quads are scanned in index blocks; points assigned in an earlier block
    are dropped from later ones, which preserves first-match semantics and
    roughly halves the pair count.
    """
    n = len(quads)
    ax = quads[:, :, 0]
    ay = quads[:, :, 1]
    bx = np.roll(ax, -1, axis=1)
    by = np.roll(ay, -1, axis=1)
    assign = np.full(len(pts), -1, dtype=np.int64)
    alive = np.arange(len(pts))
    for q0 in range(0, n, block):
        if not len(alive):
            break
        q1 = min(q0 + block, n)
        x = pts[alive, 0][:, None]
        y = pts[alive, 1][:, None]
        crossings = np.zeros((len(alive), q1 - q0), dtype=np.int8)
        for e in range(4):
            aye, bye = ay[None, q0:q1, e], by[None, q0:q1, e]
            axe, bxe = ax[None, q0:q1, e], bx[None, q0:q1, e]
            den = bye - aye
            straddle = (aye > y) != (bye > y)
            crossings += straddle & (((x - axe) * den < (y - aye) * (bxe - axe))
                                     == (den > 0))
        inside = (crossings & 1).astype(bool)
        hit = inside.any(axis=1)
        assign[alive[hit]] = np.argmax(inside[hit], axis=1) + q0
        alive = alive[~hit]
    return assign


def build_slices(curve: SegmentedCurve, circles, points: PointSet) -> list[SegmentSlice]:
    """Partition the interior points into one slice per curve segment.

    Points inside the curve are assigned to the first quad (by index) that
    contains them; leftovers go to the slice whose segment midpoint is
    nearest, so the slice counts always sum to the interior point count.
    """
    if isinstance(circles, tuple):
        centers, radii = circles
    else:
        centers = np.asarray([c.center for c in circles])
        radii = np.asarray([c.radius for c in circles])
    n = curve.n
    if len(centers) != n:
        raise ValueError(f"expected {n} circles, got {len(centers)}")
    v = curve.divisors
    vn = np.roll(v, -1, axis=0)
    on = np.roll(centers, -1, axis=0)
    quads = np.stack([v, vn, on, centers], axis=1)

    areas = _quad_areas(quads)
    diag = bbox_diagonal(curve.flat)
    areas = np.maximum(areas, AREA_FLOOR_FACTOR * diag * curve.arc_lengths)

    pts = points.points
    interior = points_in_polygon(pts, curve.flat)
    idx = np.flatnonzero(interior)
    assign = _first_quad_match(quads, pts[idx])
    missed = assign < 0
    if missed.any():
        mids = 0.5 * (v + vn)
        stray = pts[idx[missed]]
        d2 = ((stray[:, None, :] - mids[None, :, :]) ** 2).sum(axis=2)
        assign[missed] = np.argmin(d2, axis=1)

    counts = np.bincount(assign, minlength=n)
    density = counts / areas
    order = np.argsort(assign, kind="stable")
    bounds = np.searchsorted(assign[order], np.arange(n + 1))
    slices = []
    for i in range(n):
        members = idx[order[bounds[i]:bounds[i + 1]]]
        slices.append(SegmentSlice(index=i, quad=quads[i], area=float(areas[i]),
                                   count=int(counts[i]), density=float(density[i]),
                                   point_indices=members))
    return slices


def _circular_window_sums(values: np.ndarray, x: int) -> np.ndarray:
    """Sums over the circular half-open window [i-x, i+x) for every i."""
    n = len(values)
    ext = np.concatenate([values[n - x:], values, values[:x]])
    c = np.concatenate([[0.0], np.cumsum(ext)])
    i = np.arange(n)
    return c[i + 2 * x] - c[i]


def smooth_widths(slices: Sequence[SegmentSlice], x: int) -> WidthProfile:
    """Area-weighted mean of slice densities over a circular window of size 2x."""
    d = np.asarray([s.density for s in slices], dtype=float)
    a = np.asarray([s.area for s in slices], dtype=float)
    n = len(d)
    if not 1 <= x <= n // 2:
        raise BadWindow(f"window half-size {x} outside [1, {n // 2}]")
    num = _circular_window_sums(d * a, x)
    den = _circular_window_sums(a, x)
    smoothed = np.where(den > 0, num / den, 0.0)
    return WidthProfile(raw=d, smoothed=smoothed, window=x)


def scale_widths(profile: WidthProfile, c: Optional[float] = None,
                 max_width: float = 30.0) -> WidthProfile:
    """Scale smoothed densities into stroke widths.

    With ``c`` unset, the scale is chosen so the widest stroke equals
    ``max_width`` render units.
    """
    if c is None:
        peak = float(profile.smoothed.max(initial=0.0))
        c = max_width / peak if peak > 0 else 1.0
        return replace(profile, scale=c)
    if c <= 0:
        raise NonPositiveScale(f"scale must be positive, got {c}")
    return replace(profile, scale=profile.scale * c)
