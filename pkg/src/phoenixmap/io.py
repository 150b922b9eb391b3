"""Point and outline ingestion plus seeded synthetic data generators."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (NonFiniteCoordinate, ParseError, SelfIntersectingOutline,
                     TooFewVertices)
from .geometry import Outline, PointSet, ensure_ccw, polygon_is_simple


@dataclass(frozen=True)
class SeriesTable:
    """Rows of (x, y, series, time); series/time default to None."""

    coords: np.ndarray
    series: tuple
    time: tuple

    def __post_init__(self):
        pts = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", pts.reshape(-1, 2))
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "time", tuple(self.time))

    def __len__(self):
        return len(self.coords)

    def group_keys(self) -> list[tuple]:
        """(series, time) pairs: series in first-appearance order, times sorted."""
        series_order = []
        times = {}
        for s, t in zip(self.series, self.time):
            if s not in times:
                series_order.append(s)
                times[s] = set()
            times[s].add(t)
        keys = []
        for s in series_order:
            for t in sorted(times[s], key=lambda v: (v is not None, v)):
                keys.append((s, t))
        return keys

    def group(self, series, time) -> PointSet:
        mask = [s == series and t == time for s, t in zip(self.series, self.time)]
        return PointSet(points=self.coords[np.asarray(mask, dtype=bool)],
                        series_label=series, time_label=time)


def _parse_float(text: str, what: str, index: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"{what} {index}: cannot parse coordinate {text!r}",
                         index=index) from None
    if not math.isfinite(value):
        raise NonFiniteCoordinate(f"{what} {index}: non-finite coordinate {text!r}",
                                  index=index)
    return value


def _load_points_csv(path: Path) -> SeriesTable:
    coords, series, time = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ParseError(f"{path}: CSV needs 'x' and 'y' header columns", index=0)
        for i, row in enumerate(reader, start=2):   # data starts on line 2
            coords.append((_parse_float(row["x"], "line", i),
                           _parse_float(row["y"], "line", i)))
            series.append(row.get("series") or None)
            time.append(row.get("time") or None)
    return SeriesTable(coords=np.asarray(coords, dtype=float).reshape(-1, 2),
                       series=series, time=time)


def _load_points_geojson(path: Path) -> SeriesTable:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})", index=0) from None
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a FeatureCollection", index=0)
    coords, series, time = [], [], []
    for i, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        if geom.get("type") != "Point":
            raise ParseError(f"feature {i}: expected Point geometry, "
                             f"got {geom.get('type')!r}", index=i)
        xy = geom.get("coordinates") or []
        if len(xy) < 2:
            raise ParseError(f"feature {i}: malformed coordinates", index=i)
        coords.append((_parse_float(xy[0], "feature", i),
                       _parse_float(xy[1], "feature", i)))
        props = feature.get("properties") or {}
        series.append(props.get("series"))
        time.append(props.get("time"))
    return SeriesTable(coords=np.asarray(coords, dtype=float).reshape(-1, 2),
                       series=series, time=time)


def load_points(path, fmt: Optional[str] = None) -> SeriesTable:
    """Load a point table from CSV (x,y[,series,time]) or GeoJSON points."""
    path = Path(path)
    if fmt is None:
        fmt = "geojson" if path.suffix.lower() in (".geojson", ".json") else "csv"
    if fmt == "csv":
        return _load_points_csv(path)
    if fmt == "geojson":
        return _load_points_geojson(path)
    raise ParseError(f"unknown format {fmt!r}; use csv or geojson", index=0)


def _outline_from_ring(ring, origin: str) -> Outline:
    pts = np.asarray([( _parse_float(p[0], "vertex", i),
                        _parse_float(p[1], "vertex", i))
                      for i, p in enumerate(ring)], dtype=float)
    if len(pts) >= 2 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    pts = pts[keep]
    if len(pts) < 3:
        raise TooFewVertices(f"{origin}: outline needs at least 3 distinct vertices")
    if not polygon_is_simple(pts):
        raise SelfIntersectingOutline(f"{origin}: outline ring crosses itself")
    return Outline(ensure_ccw(pts))


def load_outline(path) -> Outline:
    """Load a predefined outline from a GeoJSON Polygon or a CSV vertex list.

    Only the exterior ring of a Polygon is used; clockwise rings are
    re-oriented counter-clockwise.
    """
    path = Path(path)
    if path.suffix.lower() in (".geojson", ".json"):
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSON ({exc})", index=0) from None
        geom = doc
        if doc.get("type") == "Feature":
            geom = doc.get("geometry") or {}
        elif doc.get("type") == "FeatureCollection":
            feats = doc.get("features") or []
            if not feats:
                raise ParseError(f"{path}: empty FeatureCollection", index=0)
            geom = feats[0].get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ParseError(f"{path}: expected Polygon geometry, "
                             f"got {geom.get('type')!r}", index=0)
        rings = geom.get("coordinates") or []
        if not rings:
            raise ParseError(f"{path}: Polygon has no rings", index=0)
        return _outline_from_ring(rings[0], str(path))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ParseError(f"{path}: CSV needs 'x' and 'y' header columns", index=0)
        ring = [(row["x"], row["y"]) for row in reader]
    return _outline_from_ring(ring, str(path))


def write_points_csv(table: SeriesTable, path) -> None:
    has_series = any(s is not None for s in table.series)
    has_time = any(t is not None for t in table.time)
    fields = ["x", "y"] + (["series"] if has_series else []) + (["time"] if has_time else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for (x, y), s, t in zip(table.coords, table.series, table.time):
            row = [repr(float(x)), repr(float(y))]
            if has_series:
                row.append(s or "")
            if has_time:
                row.append(t or "")
            writer.writerow(row)


SYNTH_KINDS = ("uniform", "gaussian", "ring", "mixture")

MIXTURE_CENTERS = ((3.0, 3.0), (7.0, 4.0), (5.0, 7.5))
MIXTURE_SIGMAS = (0.8, 1.1, 0.6)
MIXTURE_WEIGHTS = (0.4, 0.35, 0.25)


def generate_synthetic(kind: str, count: int, seed: int = 0,
                       series: Optional[str] = None, time: Optional[str] = None,
                       low=(0.0, 0.0), high=(10.0, 10.0),
                       center=(5.0, 5.0), sigma: float = 1.5,
                       r1: float = 3.0, r2: float = 4.0) -> SeriesTable:
    """Seeded sample table for testing and demos.

    uniform: axis-aligned rectangle [low, high]
    gaussian: isotropic normal around ``center`` with ``sigma``
    ring: annulus around ``center`` with radii in [r1, r2], uniform by area
    mixture: three-component isotropic Gaussian mixture
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        pts = rng.uniform(low, high, size=(count, 2))
    elif kind == "gaussian":
        pts = np.asarray(center) + rng.normal(0.0, sigma, size=(count, 2))
    elif kind == "ring":
        if not 0 <= r1 < r2:
            raise ValueError(f"need 0 <= r1 < r2, got {r1}, {r2}")
        theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
        r = np.sqrt(rng.uniform(r1 * r1, r2 * r2, size=count))
        pts = np.asarray(center) + np.column_stack([r * np.cos(theta),
                                                    r * np.sin(theta)])
    elif kind == "mixture":
        comp = rng.choice(len(MIXTURE_WEIGHTS), size=count, p=MIXTURE_WEIGHTS)
        centers = np.asarray(MIXTURE_CENTERS)[comp]
        sigmas = np.asarray(MIXTURE_SIGMAS)[comp]
        pts = centers + rng.normal(size=(count, 2)) * sigmas[:, None]
    else:
        raise ValueError(f"unknown kind {kind!r}; use one of {SYNTH_KINDS}")
    return SeriesTable(coords=pts, series=[series] * count, time=[time] * count)
