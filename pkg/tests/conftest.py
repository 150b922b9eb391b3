import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "suite", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

from phoenixmap.curve import ClosedCurve, fit_closed_bezier, segment_curve
from phoenixmap.geometry import Outline, ensure_ccw


UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

L_SHAPE = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0],
                    [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]])


def circle_points(m, radius=1.0, center=(0.0, 0.0)):
    ang = np.linspace(0.0, 2.0 * np.pi, m + 1)[:-1]
    return np.asarray(center) + radius * np.column_stack([np.cos(ang), np.sin(ang)])


def star_polygon(rng, m=12, r_lo=0.5, r_hi=1.0):
    """Radial-jitter polygon; angular ordering keeps it simple, orientation
    is normalized to CCW (clustered angles can put the origin outside)."""
    ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    while np.min(np.diff(ang)) < 1e-3:
        ang = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    r = rng.uniform(r_lo, r_hi, m)
    poly = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    return ensure_ccw(poly)


def polyline_curve(corners) -> ClosedCurve:
    """Closed curve whose pieces are straight lines through the corners."""
    corners = np.asarray(corners, dtype=float)
    m = len(corners)
    cp = np.empty((m, 4, 2))
    for i in range(m):
        a, b = corners[i], corners[(i + 1) % m]
        cp[i] = [a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b]
    knots = np.hypot(*(np.roll(corners, -1, axis=0) - corners).T)
    curve = ClosedCurve(control_points=cp, knots=knots, period=0.0)
    return ClosedCurve(control_points=cp, knots=knots,
                       period=curve.flatten().length)


@pytest.fixture(scope="session")
def circle_curve():
    """Spline through a dense circle sampling; geometrically a unit circle."""
    return fit_closed_bezier(Outline(circle_points(2048)))


@pytest.fixture(scope="session")
def circle_segments(circle_curve):
    return segment_curve(circle_curve, 256)


@pytest.fixture(scope="session")
def square_curve():
    return polyline_curve(UNIT_SQUARE)
