"""Planar primitives: hulls, polygon offsetting, containment and areas.

Coordinates are float arrays of shape (N, 2) in map units. Polygons are
open vertex lists (the closing edge last->first is implicit) and are kept
counter-clockwise throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CollinearInput, OffsetSelfIntersection, TooFewPoints

INSIDE = "inside"
BOUNDARY = "boundary"
OUTSIDE = "outside"

_TWO_PI = 2.0 * np.pi


def as_coords(a) -> np.ndarray:
    pts = np.asarray(a, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (N, 2) coordinates, got shape {pts.shape}")
    return pts


def bbox_diagonal(coords) -> float:
    pts = as_coords(coords)
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(np.hypot(span[0], span[1]))


def signed_area(coords) -> float:
    """Shoelace area, positive for counter-clockwise vertex order."""
    v = as_coords(coords)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


@dataclass(frozen=True)
class PointSet:
    """Raw observations, optionally tagged with series and time labels."""

    points: np.ndarray
    series_label: Optional[str] = None
    time_label: Optional[str] = None

    def __post_init__(self):
        pts = as_coords(self.points)
        if not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Outline:
    """Simple closed polygon, counter-clockwise, >= 3 vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = as_coords(self.vertices)
        if len(v) < 3:
            raise TooFewPoints(f"outline needs at least 3 vertices, got {len(v)}")
        if signed_area(v) <= 0:
            raise ValueError("outline must be counter-clockwise with positive area")
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)


def _coords_of(obj) -> np.ndarray:
    if isinstance(obj, PointSet):
        return obj.points
    if isinstance(obj, Outline):
        return obj.vertices
    return as_coords(obj)


def ensure_ccw(vertices: np.ndarray) -> np.ndarray:
    v = as_coords(vertices)
    return v if signed_area(v) > 0 else v[::-1].copy()


def polygon_area(poly) -> float:
    """Absolute shoelace area of a simple polygon, in units squared."""
    return abs(signed_area(_coords_of(poly)))


def _point_segment_dist2(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared distances from points (c,2) to each segment a[j]->b[j], result (c,m)."""
    d = b - a                                    # (m,2)
    len2 = np.einsum("md,md->m", d, d)
    w = pts[:, None, :] - a[None, :, :]          # (c,m,2)
    t = np.einsum("cmd,md->cm", w, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(len2 > 0, t / len2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
    diff = pts[:, None, :] - proj
    return np.einsum("cmd,cmd->cm", diff, diff)


def points_in_polygon(coords, polygon, boundary_tol=None, chunk=2048) -> np.ndarray:
    """Vectorized even-odd test; points on the boundary count as inside.

    ``boundary_tol`` defaults to 1e-12 times the polygon bbox diagonal. The
    boundary distance pass only runs for points the crossing test rejects.
    """
    pts = as_coords(coords)
    poly = _coords_of(polygon)
    if boundary_tol is None:
        boundary_tol = 1e-12 * bbox_diagonal(poly)
    a = poly
    b = np.roll(poly, -1, axis=0)
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    out = np.empty(len(pts), dtype=bool)
    for lo in range(0, len(pts), chunk):
        p = pts[lo:lo + chunk]
        x, y = p[:, 0][:, None], p[:, 1][:, None]
        den = by - ay
        straddle = (ay > y) != (by > y)
        # x < ax + (y - ay)(bx - ax)/den, multiplied through by den
        hit = straddle & (((x - ax) * den < (y - ay) * (bx - ax)) == (den > 0))
        inside = (hit.sum(axis=1) & 1).astype(bool)
        if boundary_tol > 0 and not inside.all():
            miss = ~inside
            d2 = _point_segment_dist2(p[miss], a, b).min(axis=1)
            inside[miss] = d2 <= boundary_tol * boundary_tol
        out[lo:lo + chunk] = inside
    return out


def point_in_polygon(p, poly) -> str:
    """Classify one point against a simple polygon using the even-odd rule.

    Returns one of INSIDE, BOUNDARY, OUTSIDE. Boundary hits are detected
    within 1e-12 times the polygon bbox diagonal.
    """
    vertices = _coords_of(poly)
    pt = np.asarray(p, dtype=float).reshape(1, 2)
    tol = 1e-12 * bbox_diagonal(vertices)
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    d2 = _point_segment_dist2(pt, a, b).min()
    if d2 <= tol * tol:
        return BOUNDARY
    if points_in_polygon(pt, vertices, boundary_tol=0.0)[0]:
        return INSIDE
    return OUTSIDE


def _proper_crossings(a0, a1, b0, b1) -> np.ndarray:
    """True where open segment (a0,a1) strictly crosses open segments (b0[j],b1[j])."""
    d1 = a1 - a0
    d2 = b1 - b0                                  # (m,2)
    d3 = a0 - b0                                  # (m,2)
    cross = d1[0] * d2[:, 1] - d2[:, 0] * d1[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (d2[:, 0] * d3[:, 1] - d2[:, 1] * d3[:, 0]) / cross
        t2 = (d1[0] * d3[:, 1] - d1[1] * d3[:, 0]) / cross
    hit = (cross != 0.0) & (t1 > 0.0) & (t1 < 1.0) & (t2 > 0.0) & (t2 < 1.0)
    return hit


def polygon_is_simple(vertices, tol=None) -> bool:
    """Exhaustive O(m^2) check: no crossing edges, no vertex on a far edge."""
    v = as_coords(vertices)
    m = len(v)
    if m < 3:
        return False
    if tol is None:
        tol = 1e-12 * bbox_diagonal(v)
    # duplicate vertices collapse edges and are rejected outright
    d = v - np.roll(v, 1, axis=0)
    if np.min(np.einsum("md,md->m", d, d)) <= tol * tol:
        return False
    a = v
    b = np.roll(v, -1, axis=0)
    for i in range(m):
        # skip edge i itself and both neighbours (shared-vertex pairs)
        js = np.arange(i + 2, m if i > 0 else m - 1)
        if len(js) == 0:
            continue
        if _proper_crossings(a[i], b[i], a[js], b[js]).any():
            return False
    # vertices lying on a non-adjacent edge make a degenerate touch
    idx = np.arange(m)
    prev = (idx - 1) % m
    chunk = max(1, 2_000_000 // m)
    for lo in range(0, m, chunk):
        rows = idx[lo:lo + chunk]
        d2 = _point_segment_dist2(v[rows], a, b)
        d2[np.arange(len(rows)), rows] = np.inf          # own outgoing edge
        d2[np.arange(len(rows)), prev[rows]] = np.inf    # own incoming edge
        if d2.min() <= tol * tol:
            return False
    return True


def _all_collinear(pts: np.ndarray) -> bool:
    p0 = pts[0]
    rel = pts - p0
    far = rel[np.argmax(np.einsum("nd,nd->n", rel, rel))]
    cross = rel[:, 0] * far[1] - rel[:, 1] * far[0]
    scale = bbox_diagonal(pts) or 1.0
    return bool(np.max(np.abs(cross)) <= 1e-12 * scale * scale)


def convex_hull(points) -> Outline:
    """Smallest convex CCW polygon containing the points (monotone chain)."""
    pts = _coords_of(points)
    if len(pts) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(pts)}")
    uniq = np.unique(pts, axis=0)
    if len(uniq) < 3:
        raise TooFewPoints(f"need at least 3 distinct points, got {len(uniq)}")
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    p = uniq[order]

    def half(chain_pts):
        chain = []
        for q in chain_pts:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (q[1] - o[1]) - (a[1] - o[1]) * (q[0] - o[0]) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(q)
        return chain[:-1]

    hull = half(p) + half(p[::-1])
    if len(hull) < 3:
        raise CollinearInput("all points are collinear")
    return Outline(np.array(hull))


def _edge_crosses_chain(a, b, chain: np.ndarray) -> bool:
    if len(chain) < 2:
        return False
    return bool(_proper_crossings(a, b, chain[:-1], chain[1:]).any())


def _knn_hull_attempt(pts: np.ndarray, kk: int) -> Optional[np.ndarray]:
    """One pass of the k-nearest-neighbour boundary walk; None means retry with k+1."""
    n = len(pts)
    start = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])   # lowest y, then lowest x
    active = np.ones(n, dtype=bool)
    active[start] = False
    hull = [start]
    cur = start
    prev_angle = np.pi
    closed = False
    while active.any():
        if len(hull) == 4:
            active[start] = True                 # allow the walk to close
        act_idx = np.flatnonzero(active)
        rel = pts[act_idx] - pts[cur]
        d2 = np.einsum("nd,nd->n", rel, rel)
        if len(act_idx) > kk:
            keep = np.argpartition(d2, kk - 1)[:kk]
        else:
            keep = np.arange(len(act_idx))
        cand = act_idx[keep]
        cd2 = d2[keep]
        ang = np.arctan2(pts[cand, 1] - pts[cur, 1], pts[cand, 0] - pts[cur, 0])
        cw = (prev_angle - ang) % _TWO_PI        # clockwise turn from the reversed last edge
        chain = pts[np.asarray(hull)]
        chosen = -1
        for j in np.lexsort((cd2, cw)):
            c = int(cand[j])
            if _edge_crosses_chain(pts[cur], pts[c], chain):
                continue
            chosen = c
            break
        if chosen < 0:
            return None
        if chosen == start:
            closed = True
            break
        hull.append(chosen)
        prev_angle = float(np.arctan2(pts[cur, 1] - pts[chosen, 1],
                                      pts[cur, 0] - pts[chosen, 0]))
        active[chosen] = False
        cur = chosen
    if len(hull) < 3:
        return None
    hull_pts = pts[np.asarray(hull)]
    if not closed and _edge_crosses_chain(hull_pts[-1], hull_pts[0], hull_pts):
        return None
    if not polygon_is_simple(hull_pts):
        return None
    rest = np.ones(n, dtype=bool)
    rest[np.asarray(hull)] = False
    # strict crossing test: an exact on-edge point would force one extra
    # escalation, which is conservative and vanishingly rare for float data
    if rest.any() and not points_in_polygon(pts[rest], hull_pts,
                                            boundary_tol=0.0).all():
        return None
    return hull_pts


def concave_hull(points, k: int = 3) -> Outline:
    """K-nearest-neighbour concave hull with automatic k escalation.

    Starts the boundary walk at the requested k (minimum 3) and retries
    with k+1 whenever the candidate hull self-intersects or leaves a point
    outside. Falls back to the convex hull when k reaches the point count.
    """
    pts = _coords_of(points)
    if len(pts) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(pts)}")
    uniq = np.unique(pts, axis=0)                 # duplicates break the k-NN ordering
    if len(uniq) < 3:
        raise TooFewPoints(f"need at least 3 distinct points, got {len(uniq)}")
    if _all_collinear(uniq):
        raise CollinearInput("all points are collinear")
    if len(uniq) == 3:
        return Outline(ensure_ccw(uniq))
    kk = max(3, int(k))
    while kk < len(uniq):
        hull = _knn_hull_attempt(uniq, min(kk, len(uniq) - 1))
        if hull is not None:
            return Outline(ensure_ccw(hull))
        kk += 1
    return convex_hull(uniq)


def densify_outline(outline: Outline, max_edge: Optional[float] = None) -> Outline:
    """Split long edges so a spline through the vertices hugs the polygon.

    ``max_edge`` defaults to 2 percent of the outline bbox diagonal. Outlines
    whose edges are already short (hulls of dense data) pass through nearly
    unchanged.
    """
    v = _coords_of(outline)
    if max_edge is None:
        max_edge = 0.02 * bbox_diagonal(v)
    if max_edge <= 0:
        raise ValueError(f"max_edge must be positive, got {max_edge}")
    nxt = np.roll(v, -1, axis=0)
    lengths = np.hypot(*(nxt - v).T)
    pieces = np.maximum(np.ceil(lengths / max_edge).astype(int), 1)
    out = []
    for a, b_, k in zip(v, nxt, pieces):
        frac = np.arange(k) / k
        out.append(a[None, :] + frac[:, None] * (b_ - a)[None, :])
    return Outline(np.vstack(out))


def offset_outline(outline: Outline, b: float) -> Outline:
    """Displace every vertex outward by ``b`` along its vertex normal.

    The vertex normal is the bisector of the two adjacent edge normals
    (miter join); the miter length is capped at 4*b so sharp reflex
    vertices cannot spike.
    """
    if b <= 0:
        raise ValueError(f"offset must be positive, got {b}")
    v = _coords_of(outline)
    # collapse consecutive duplicates so edge directions are well defined
    keep = np.einsum("nd,nd->n", v - np.roll(v, 1, axis=0), v - np.roll(v, 1, axis=0)) > 0
    if not keep.all():
        v = v[keep]
    if len(v) < 3:
        raise TooFewPoints("outline degenerates to fewer than 3 distinct vertices")
    e = np.roll(v, -1, axis=0) - v
    elen = np.hypot(e[:, 0], e[:, 1])
    t = e / elen[:, None]
    normals = np.column_stack([t[:, 1], -t[:, 0]])       # outward for CCW
    n_prev = np.roll(normals, 1, axis=0)
    m = n_prev + normals
    mlen = np.hypot(m[:, 0], m[:, 1])
    degenerate = mlen < 1e-9
    safe_mlen = np.where(degenerate, 1.0, mlen)
    u = np.where(degenerate[:, None], n_prev, m / safe_mlen[:, None])
    miter = np.where(degenerate, 4.0 * b, np.minimum(2.0 * b / safe_mlen, 4.0 * b))
    off = v + u * miter[:, None]
    if not polygon_is_simple(off):
        raise OffsetSelfIntersection(
            f"offset {b} self-intersects; use a smaller offset")
    strict_tol = 1e-12 * bbox_diagonal(off)
    inside = points_in_polygon(v, off, boundary_tol=0.0)
    clear = _point_segment_dist2(v, off, np.roll(off, -1, axis=0)).min(axis=1)
    if not (inside.all() and (clear > strict_tol * strict_tol).all()):
        raise OffsetSelfIntersection(
            f"offset {b} does not strictly contain the source outline")
    return Outline(off)
