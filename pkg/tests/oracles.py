"""Independent reference implementations used to check the package.

Everything here leans on shapely/scipy or plain brute force so the checks
never share code with the implementation under test.
"""

from __future__ import annotations

import numpy as np
import shapely
from scipy.stats import spearmanr
from shapely.geometry import Polygon


def shapely_polygon(vertices) -> Polygon:
    return Polygon(np.asarray(vertices, dtype=float))


def covers(vertices, points) -> np.ndarray:
    """Boundary-inclusive containment for many points."""
    poly = shapely_polygon(vertices)
    geoms = shapely.points(np.asarray(points, dtype=float))
    return shapely.covers(poly, geoms)


def contains_strict(vertices, points) -> np.ndarray:
    poly = shapely_polygon(vertices)
    geoms = shapely.points(np.asarray(points, dtype=float))
    return shapely.contains(poly, geoms)


def boundary_distance(vertices, points) -> np.ndarray:
    ring = shapely.linearrings(np.asarray(vertices, dtype=float))
    geoms = shapely.points(np.asarray(points, dtype=float))
    return shapely.distance(ring, geoms)


def polygon_area(vertices) -> float:
    return shapely_polygon(vertices).area


def polygon_is_valid(vertices) -> bool:
    return shapely_polygon(vertices).is_valid


def monte_carlo_area(vertices, n=1_000_000, seed=0) -> float:
    """Containment-fraction estimate of polygon area over its bbox."""
    v = np.asarray(vertices, dtype=float)
    rng = np.random.default_rng(seed)
    lo, hi = v.min(axis=0), v.max(axis=0)
    sample = rng.uniform(lo, hi, size=(n, 2))
    frac = covers(v, sample).mean()
    return float(frac * np.prod(hi - lo))


def first_match_assign(quads, points) -> np.ndarray:
    """First containing quad per point (boundary-inclusive), -1 if none.

    Scans quads in index order over the still-unassigned points, the same
    contract the slice builder implements with its own containment code.
    """
    pts = np.asarray(points, dtype=float)
    assign = np.full(len(pts), -1, dtype=int)
    alive = np.arange(len(pts))
    for i, quad in enumerate(quads):
        if not len(alive):
            break
        hit = covers(quad, pts[alive])
        assign[alive[hit]] = i
        alive = alive[~hit]
    return assign


def first_match_assign_fast(quads, points) -> np.ndarray:
    """Same contract as first_match_assign, indexed for millions of points.

    All containment pairs come from one bulk STRtree query; the first-match
    rule is recovered as the minimum containing quad index per point.
    """
    pts = np.asarray(points, dtype=float)
    quads = np.asarray(quads, dtype=float)
    n = len(quads)
    tree = shapely.STRtree(shapely.points(pts))
    poly_idx, pt_idx = tree.query(shapely.polygons(quads), predicate="covers")
    best = np.full(len(pts), n, dtype=np.int64)
    np.minimum.at(best, pt_idx, poly_idx)
    best[best == n] = -1
    return best


def nearest_midpoint(divisors, points) -> np.ndarray:
    v = np.asarray(divisors, dtype=float)
    mids = 0.5 * (v + np.roll(v, -1, axis=0))
    pts = np.asarray(points, dtype=float)
    d2 = ((pts[:, None, :] - mids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def naive_wam(densities, areas, x) -> np.ndarray:
    """Direct double loop over the circular half-open window [i-x, i+x)."""
    d = np.asarray(densities, dtype=float)
    a = np.asarray(areas, dtype=float)
    n = len(d)
    out = np.empty(n)
    for i in range(n):
        num = den = 0.0
        for k in range(i - x, i + x):
            num += d[k % n] * a[k % n]
            den += a[k % n]
        out[i] = num / den if den > 0 else 0.0
    return out


def spearman(a, b) -> float:
    return float(spearmanr(a, b).statistic)


def fit_circle(points) -> tuple[np.ndarray, float]:
    """Algebraic least-squares circle fit (Kasa)."""
    p = np.asarray(points, dtype=float)
    A = np.column_stack([2 * p[:, 0], 2 * p[:, 1], np.ones(len(p))])
    b = (p ** 2).sum(axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(A, b, rcond=None)
    r = np.sqrt(c + cx * cx + cy * cy)
    return np.array([cx, cy]), float(r)


def total_variation(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.abs(np.diff(np.r_[v, v[0]])).sum())


def smooth_profile(values, window=5) -> np.ndarray:
    """Plain boxcar with shrinking edges, for radial-profile assertions."""
    v = np.asarray(values, dtype=float)
    kernel = np.ones(window)
    num = np.convolve(v, kernel, mode="same")
    den = np.convolve(np.ones_like(v), kernel, mode="same")
    return num / den
