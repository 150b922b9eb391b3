import numpy as np
import pytest

import oracles
from phoenixmap.curve import fit_closed_bezier, segment_curve
from phoenixmap.density import build_slices, inscribed_circles, smooth_widths
from phoenixmap.geometry import (Outline, PointSet, densify_outline,
                                 offset_outline, points_in_polygon)
from phoenixmap.io import generate_synthetic
from phoenixmap.legend import (LegendSpec, build_legend, radial_profile,
                               width_bars)
from phoenixmap.density import WidthProfile


RECT = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 6.0], [0.0, 6.0]])


def rect_slices(points, n=128):
    outline = offset_outline(densify_outline(Outline(RECT)), 0.2)
    seg = segment_curve(fit_closed_bezier(outline), n)
    slices = build_slices(seg, inscribed_circles(seg), points)
    return seg, slices


def uniform_in(segmented, count, seed):
    """Uniform sample over the interior of the segmented curve."""
    rng = np.random.default_rng(seed)
    lo, hi = segmented.flat.min(axis=0), segmented.flat.max(axis=0)
    pts = rng.uniform(lo, hi, size=(int(count * 1.4), 2))
    pts = pts[points_in_polygon(pts, segmented.flat)]
    return PointSet(pts[:count])


class TestRadialProfile:
    def test_uniform_is_flat(self):
        seg, _ = rect_slices(PointSet(RECT))
        pts = uniform_in(seg, 250_000, seed=1)
        _, slices = rect_slices(pts)
        profile = radial_profile(slices, pts, 100)
        smoothed = oracles.smooth_profile(profile, 5)
        global_density = sum(s.count for s in slices) / sum(s.area for s in slices)
        assert np.abs(smoothed - global_density).max() / global_density < 0.15

    def test_area_weighted_mean_matches_global_density(self):
        seg, _ = rect_slices(PointSet(RECT))
        pts = uniform_in(seg, 40_000, seed=2)
        _, slices = rect_slices(pts)
        quads = np.asarray([s.quad for s in slices])
        profile = radial_profile(slices, pts, 100)
        global_density = sum(s.count for s in slices) / sum(s.area for s in slices)
        f = np.linspace(0, 1, 101)
        v0, v1, o1, o0 = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]
        left = o0[:, None, :] + f[None, :, None] * (v0 - o0)[:, None, :]
        right = o1[:, None, :] + f[None, :, None] * (v1 - o1)[:, None, :]
        a, b, c, d = left[:, :-1], right[:, :-1], right[:, 1:], left[:, 1:]

        def cross(u, w):
            return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]

        areas = 0.5 * np.abs(cross(b - a, c - a) + cross(c - a, d - a))
        bin_areas = areas.sum(axis=0)
        mean = (profile * bin_areas).sum() / bin_areas.sum()
        assert abs(mean - global_density) / global_density < 0.02

    def test_gaussian_monotone_center_to_edge(self):
        rng = np.random.default_rng(3)
        pts = PointSet(np.asarray([5.0, 3.0])
                       + rng.normal(0, 1.3, size=(60_000, 2)))
        keep = ((pts.points > [0, 0]) & (pts.points < [10, 6])).all(axis=1)
        pts = PointSet(pts.points[keep])
        _, slices = rect_slices(pts)
        profile = radial_profile(slices, pts, 100)
        smoothed = oracles.smooth_profile(profile, 5)
        assert (np.diff(smoothed) <= 1e-9 + 0.02 * smoothed.max()).all()
        assert smoothed[0] > smoothed[-1]

    def test_edge_hugging_annulus(self):
        table = generate_synthetic("ring", 20_000, seed=4, center=(0.0, 0.0),
                                   r1=0.85, r2=0.98)
        pts = PointSet(table.coords)
        from conftest import circle_points
        seg = segment_curve(fit_closed_bezier(Outline(circle_points(512))), 128)
        slices = build_slices(seg, inscribed_circles(seg), pts)
        profile = radial_profile(slices, pts, 100)
        q = len(profile) // 4
        assert profile[-q:].mean() > profile[:q].mean()

    def test_rejects_tiny_bin_count(self):
        rng = np.random.default_rng(5)
        pts = PointSet(rng.uniform((0, 0), (10, 6), size=(100, 2)))
        _, slices = rect_slices(pts)
        with pytest.raises(ValueError):
            radial_profile(slices, pts, 1)


class TestWidthBars:
    def prof(self, peak, scale=1.0):
        return WidthProfile(raw=np.full(32, peak), smoothed=np.full(32, peak),
                            window=1, scale=scale)

    def test_single_bar_at_peak(self):
        bars = width_bars(self.prof(100.0), count=1)
        assert len(bars) == 1
        assert bars[0].label == "100 P / SQU"
        assert bars[0].density == pytest.approx(100.0)

    def test_round_step_policy_quarters(self):
        bars = width_bars(self.prof(100.0), count=4)
        assert [b.density for b in bars] == [25.0, 50.0, 75.0, 100.0]
        assert [b.label for b in bars] == [
            "25 P / SQU", "50 P / SQU", "75 P / SQU", "100 P / SQU"]

    def test_doubling_scale_doubles_widths_keeps_labels(self):
        base = width_bars(self.prof(100.0, scale=1.0), count=4)
        doubled = width_bars(self.prof(100.0, scale=2.0), count=4)
        assert [b.label for b in base] == [b.label for b in doubled]
        for b1, b2 in zip(base, doubled):
            assert b2.width == pytest.approx(2 * b1.width)

    def test_labels_increasing_and_widths_consistent(self):
        rng = np.random.default_rng(7)
        prof = WidthProfile(raw=rng.uniform(0, 7, 64),
                            smoothed=rng.uniform(0.1, 7, 64),
                            window=3, scale=3.7)
        bars = width_bars(prof, count=5)
        densities = [b.density for b in bars]
        assert densities == sorted(densities)
        assert len(set(densities)) == len(densities)
        for b in bars:
            assert abs(b.width / prof.scale - b.density) < 1e-9

    def test_zero_profile(self):
        bars = width_bars(self.prof(0.0), count=3)
        assert len(bars) == 1 and bars[0].density == 0.0


class TestBuildLegend:
    def test_composes_profile_and_bars(self):
        rng = np.random.default_rng(8)
        pts = PointSet(rng.uniform((0, 0), (10, 6), size=(5000, 2)))
        _, slices = rect_slices(pts, n=64)
        profile = smooth_widths(slices, 6)
        legend = build_legend(slices, pts, profile, bins=40, bar_count=3)
        assert isinstance(legend, LegendSpec)
        assert len(legend.radial_profile) == 40
        assert (legend.radial_profile >= 0).all()
        assert len(legend.width_bars) >= 1
