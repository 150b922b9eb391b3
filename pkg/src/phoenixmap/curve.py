"""Closed smooth curve through outline vertices and its equal-arc segmentation.

The fit is a periodic natural cubic interpolating spline with chord-length
parameterization, expressed as cubic Bezier pieces so every piece can be
evaluated, subdivided and flattened independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadSegmentCount, DegenerateOutline
from .geometry import Outline, as_coords, bbox_diagonal, signed_area

FLATTEN_TOL_FACTOR = 1e-4     # arc-length table tolerance, times bbox diagonal
MIN_SEGMENTS = 16


def _thomas(lower, diag, upper, rhs):
    """Solve a (non-cyclic) tridiagonal system; rhs may be (n,) or (n, k)."""
    n = len(diag)
    d = diag.astype(float).copy()
    r = rhs.astype(float).copy()
    for i in range(1, n):
        w = lower[i] / d[i - 1]
        d[i] -= w * upper[i - 1]
        r[i] -= w * r[i - 1]
    x = np.empty_like(r)
    x[-1] = r[-1] / d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (r[i] - upper[i] * x[i + 1]) / d[i]
    return x


def solve_cyclic_tridiagonal(lower, diag, upper, rhs):
    """Solve the cyclic system lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i].

    Corner entries are lower[0] (row 0 acting on x[n-1]) and upper[-1]
    (row n-1 acting on x[0]). Sherman-Morrison with two Thomas sweeps.
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = len(diag)
    if n < 3:
        raise ValueError("cyclic system needs at least 3 rows")
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= lower[0] * upper[-1] / gamma
    y = _thomas(lower, d, upper, rhs)
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = upper[-1]
    q = _thomas(lower, d, upper, u)
    vy = y[0] + lower[0] / gamma * y[-1]
    vq = q[0] + lower[0] / gamma * q[-1]
    if y.ndim == 1:
        return y - q * (vy / (1.0 + vq))
    return y - q[:, None] * (vy / (1.0 + vq))[None, :]


@dataclass(frozen=True)
class ClosedCurve:
    """Closed composite cubic Bezier. Piece j runs from vertex j to vertex j+1."""

    control_points: np.ndarray   # (m, 4, 2)
    knots: np.ndarray            # (m,) chord-length parameter span per piece
    period: float                # total arc length estimate

    @property
    def n_pieces(self) -> int:
        return len(self.control_points)

    def point(self, piece, u) -> np.ndarray:
        q = self.control_points[np.asarray(piece)]
        u = np.asarray(u, dtype=float)[..., None]
        s = 1.0 - u
        return (s * s * s * q[..., 0, :] + 3.0 * s * s * u * q[..., 1, :]
                + 3.0 * s * u * u * q[..., 2, :] + u * u * u * q[..., 3, :])

    def derivative(self, piece, u) -> np.ndarray:
        q = self.control_points[np.asarray(piece)]
        u = np.asarray(u, dtype=float)[..., None]
        s = 1.0 - u
        return 3.0 * (s * s * (q[..., 1, :] - q[..., 0, :])
                      + 2.0 * s * u * (q[..., 2, :] - q[..., 1, :])
                      + u * u * (q[..., 3, :] - q[..., 2, :]))

    def second_derivative(self, piece, u) -> np.ndarray:
        q = self.control_points[np.asarray(piece)]
        u = np.asarray(u, dtype=float)[..., None]
        s = 1.0 - u
        return 6.0 * (s * (q[..., 2, :] - 2.0 * q[..., 1, :] + q[..., 0, :])
                      + u * (q[..., 3, :] - 2.0 * q[..., 2, :] + q[..., 1, :]))

    def bbox_diagonal(self) -> float:
        return bbox_diagonal(self.control_points.reshape(-1, 2))

    def flatten(self, tol=None) -> "FlatTable":
        if tol is None:
            tol = FLATTEN_TOL_FACTOR * self.bbox_diagonal()
        return _flatten_curve(self, tol)


@dataclass(frozen=True)
class FlatTable:
    """Ordered polyline on the curve with per-vertex parameters and arc length."""

    points: np.ndarray      # (M, 2), first and last vertex coincide
    piece: np.ndarray       # (M,) piece index of each vertex
    u: np.ndarray           # (M,) local parameter of each vertex
    s: np.ndarray           # (M,) cumulative polyline length, s[0] == 0

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def polygon(self) -> np.ndarray:
        """Open polygon view (closing duplicate dropped)."""
        return self.points[:-1]

    def lookup(self, targets) -> tuple[np.ndarray, np.ndarray]:
        """Map arc-length values to (piece, u) by linear interpolation."""
        t = np.asarray(targets, dtype=float)
        j = np.clip(np.searchsorted(self.s, t, side="right") - 1, 0, len(self.s) - 2)
        s0, s1 = self.s[j], self.s[j + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(s1 > s0, (t - s0) / (s1 - s0), 0.0)
        piece = self.piece[j + 1]
        u_end = self.u[j + 1]
        u_start = np.where(self.piece[j] == piece, self.u[j], 0.0)
        return piece, u_start + frac * (u_end - u_start)


def _flat_enough(q: np.ndarray, tol: float) -> bool:
    chord = q[3] - q[0]
    len2 = chord[0] * chord[0] + chord[1] * chord[1]
    d1 = q[1] - q[0]
    d2 = q[2] - q[0]
    if len2 <= tol * tol:
        return max(d1 @ d1, d2 @ d2) <= tol * tol
    c1 = abs(d1[0] * chord[1] - d1[1] * chord[0])
    c2 = abs(d2[0] * chord[1] - d2[1] * chord[0])
    return max(c1, c2) * max(c1, c2) <= tol * tol * len2


def _split(q: np.ndarray):
    """De Casteljau split at u = 0.5."""
    p01 = 0.5 * (q[0] + q[1])
    p12 = 0.5 * (q[1] + q[2])
    p23 = 0.5 * (q[2] + q[3])
    p012 = 0.5 * (p01 + p12)
    p123 = 0.5 * (p12 + p23)
    mid = 0.5 * (p012 + p123)
    return (np.array([q[0], p01, p012, mid]), np.array([mid, p123, p23, q[3]]))


def _flatten_curve(curve: ClosedCurve, tol: float) -> FlatTable:
    pts = [curve.control_points[0, 0]]
    pieces = [0]
    us = [0.0]
    for j in range(curve.n_pieces):
        stack = [(0.0, 1.0, curve.control_points[j])]
        while stack:
            u0, u1, q = stack.pop()
            if _flat_enough(q, tol) or (u1 - u0) <= 1e-6:
                pts.append(q[3])
                pieces.append(j)
                us.append(u1)
            else:
                um = 0.5 * (u0 + u1)
                left, right = _split(q)
                stack.append((um, u1, right))
                stack.append((u0, um, left))
    points = np.asarray(pts)
    steps = np.hypot(*(points[1:] - points[:-1]).T)
    s = np.concatenate([[0.0], np.cumsum(steps)])
    return FlatTable(points=points, piece=np.asarray(pieces), u=np.asarray(us), s=s)


def fit_closed_bezier(outline) -> ClosedCurve:
    """Periodic C2 cubic interpolating spline through the outline vertices.

    Inner Bezier control points come from a cyclic tridiagonal solve for the
    vertex tangents under chord-length parameterization.
    """
    v = as_coords(outline.vertices if isinstance(outline, Outline) else outline)
    keep = np.einsum("nd,nd->n", v - np.roll(v, 1, axis=0), v - np.roll(v, 1, axis=0)) > 0
    v = v[keep]
    if len(v) < 3:
        raise DegenerateOutline(
            f"need at least 3 distinct vertices, got {len(v)}")
    m = len(v)
    nxt = np.roll(v, -1, axis=0)
    prv = np.roll(v, 1, axis=0)
    h = np.hypot(*(nxt - v).T)
    h = np.maximum(h, 1e-12 * bbox_diagonal(v))
    hp = np.roll(h, 1)
    lower = 1.0 / hp
    upper = 1.0 / h
    diag = 2.0 * (lower + upper)
    rhs = 3.0 * ((v - prv) / (hp * hp)[:, None] + (nxt - v) / (h * h)[:, None])
    tangents = solve_cyclic_tridiagonal(lower, diag, upper, rhs)
    p1 = v + tangents * (h / 3.0)[:, None]
    p2 = nxt - np.roll(tangents, -1, axis=0) * (h / 3.0)[:, None]
    cp = np.stack([v, p1, p2, nxt], axis=1)
    curve = ClosedCurve(control_points=cp, knots=h, period=0.0)
    period = curve.flatten().length
    return ClosedCurve(control_points=cp, knots=h, period=period)


@dataclass(frozen=True)
class SegmentedCurve:
    """Equal-arc division of a closed curve into n segments.

    ``divisors[i]`` starts segment i; the segment ends at divisor (i+1) mod n.
    ``flat`` is the adaptive flattening used for containment and area tests,
    ``samples`` a denser equal-arc sampling used for distance constraints.
    """

    curve: ClosedCurve
    divisors: np.ndarray        # (n, 2) points on the curve
    inward_normals: np.ndarray  # (n, 2) unit vectors into the enclosed region
    arc_lengths: np.ndarray     # (n,) measured per-segment arc length
    piece: np.ndarray           # (n,) Bezier piece of each divisor
    u: np.ndarray               # (n,) local parameter of each divisor
    arc_positions: np.ndarray   # (n,) divisor positions along the curve
    flat: np.ndarray            # (Mf, 2) open polygon approximating the curve
    samples: np.ndarray         # (Md, 2) dense equal-arc points on the curve
    length: float               # total arc length

    @property
    def n(self) -> int:
        return len(self.divisors)


def _measure_segments(curve: ClosedCurve, table: FlatTable, targets: np.ndarray,
                      sub: int = 8):
    """Divisors at the target table positions plus honest segment arc lengths.

    Arc lengths come from a ``sub``-fold chordal subsampling of the true
    curve between consecutive divisors, so they are independent of the
    table's own chord-length bias.
    """
    n = len(targets)
    total = table.length
    piece, u = table.lookup(targets)
    gaps = np.diff(np.r_[targets, total + targets[0]])
    fine = (targets[:, None] + np.arange(sub + 1)[None, :] * (gaps / sub)[:, None])
    fp, fu = table.lookup(np.minimum(fine.ravel(), total))
    fine_pts = curve.point(fp, fu).reshape(n, sub + 1, 2)
    fine_pts[:-1, -1] = fine_pts[1:, 0]
    fine_pts[-1, -1] = fine_pts[0, 0]
    steps = np.diff(fine_pts, axis=1)
    arc = np.hypot(steps[..., 0], steps[..., 1]).sum(axis=1)
    return piece, u, arc


def segment_curve(curve: ClosedCurve, n: int) -> SegmentedCurve:
    """Divide the curve into ``n`` near-equal arc-length segments.

    Divisor points come from a piecewise-linear arc-length table built by
    adaptive flattening, then get refined against honestly measured arc
    lengths, which removes the table's chord and parameter-speed bias.
    Inward normals are the curve tangents rotated toward the enclosed region.
    """
    if n < MIN_SEGMENTS:
        raise BadSegmentCount(f"need at least {MIN_SEGMENTS} segments, got {n}")
    table = curve.flatten()
    total = table.length
    targets = np.arange(n) * (total / n)
    piece, u, arc = _measure_segments(curve, table, targets)
    for _ in range(2):
        honest_total = arc.sum()
        s_honest = np.r_[0.0, np.cumsum(arc)[:-1]]
        residual = s_honest - np.arange(n) * (honest_total / n)
        if np.abs(residual).max() <= 1e-9 * total:
            break
        targets = np.clip(targets - residual, 0.0, total)
        piece, u, arc = _measure_segments(curve, table, targets)

    divisors = curve.point(piece, u)
    tangents = curve.derivative(piece, u)
    tlen = np.hypot(tangents[:, 0], tangents[:, 1])
    tlen = np.maximum(tlen, 1e-300)
    t_unit = tangents / tlen[:, None]
    ccw = signed_area(table.polygon) > 0
    if ccw:
        normals = np.column_stack([-t_unit[:, 1], t_unit[:, 0]])
    else:
        normals = np.column_stack([t_unit[:, 1], -t_unit[:, 0]])

    dense_n = max(4096, n)
    dp, du = table.lookup(np.arange(dense_n) * (total / dense_n))
    samples = curve.point(dp, du)

    return SegmentedCurve(curve=curve, divisors=divisors, inward_normals=normals,
                          arc_lengths=arc, piece=piece, u=u, arc_positions=targets,
                          flat=table.polygon, samples=samples, length=total)


def curve_self_intersects(curve: ClosedCurve, tol=None) -> bool:
    """O(M^2) proper-crossing scan over the flattened curve. Test helper."""
    from .geometry import polygon_is_simple

    flat = curve.flatten(tol).polygon
    return not polygon_is_simple(flat)
