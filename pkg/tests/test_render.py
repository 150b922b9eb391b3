import re
import zlib

import numpy as np
import pytest

import oracles
from conftest import circle_points
from phoenixmap.curve import fit_closed_bezier, segment_curve
from phoenixmap.density import WidthProfile, inscribed_circles
from phoenixmap.errors import EmptyScene
from phoenixmap.geometry import Outline, PointSet, polygon_area
from phoenixmap.legend import LegendSpec, WidthBar
from phoenixmap.render import (GRADIENT_END, GRADIENT_START, PALETTES,
                               DotLayer, RenderSpec,
                               Transform, build_band, encode_png_rgba,
                               lab_lerp, render_heat_reference, render_svg,
                               render_time_gradient)


def flat_profile(n, width, scale=1.0):
    return WidthProfile(raw=np.full(n, width), smoothed=np.full(n, width),
                        window=1, scale=scale)


@pytest.fixture(scope="module")
def disc_segments():
    return segment_curve(fit_closed_bezier(Outline(circle_points(512))), 512)


def default_spec(width=400.0, height=300.0):
    t = Transform.fit((-1.2, -1.2, 1.2, 1.2), width, height, margin=20.0)
    return RenderSpec(width=width, height=height, transform=t)


class TestTransform:
    def test_fit_keeps_bbox_inside_canvas(self):
        t = Transform.fit((0, 0, 10, 6), 1000, 800, margin=40)
        corners = t.apply([[0, 0], [10, 6]])
        assert (corners >= 39.999).all()
        assert (corners[:, 0] <= 960.001).all() and (corners[:, 1] <= 760.001).all()

    def test_rejects_degenerate_scale(self):
        with pytest.raises(ValueError):
            Transform(scale=0.0, tx=0.0, ty=0.0)

    def test_y_axis_flips(self):
        t = Transform(scale=2.0, tx=0.0, ty=100.0)
        a, b = t.apply([[0.0, 0.0], [0.0, 1.0]])
        assert b[1] < a[1]


class TestBuildBand:
    def test_zero_widths_zero_area(self, disc_segments):
        band = build_band(disc_segments, flat_profile(512, 0.0))
        assert np.allclose(band.outer, band.inner)
        area = polygon_area(band.outer) - polygon_area(band.inner)
        assert area == pytest.approx(0.0, abs=1e-12)

    def test_constant_width_annulus_area(self, disc_segments):
        w = 0.25
        band = build_band(disc_segments, flat_profile(512, w))
        area = polygon_area(band.outer) - polygon_area(band.inner)
        want = np.pi * (1.0 ** 2 - (1.0 - w) ** 2)
        assert area == pytest.approx(want, rel=0.01)

    def test_inner_points_stay_inside_curve(self, disc_segments):
        rng = np.random.default_rng(0)
        widths = rng.uniform(0.0, 0.9, 512)
        profile = WidthProfile(raw=widths, smoothed=widths, window=1)
        _, radii = inscribed_circles(disc_segments)
        band = build_band(disc_segments, profile, radii=radii)
        dist = oracles.boundary_distance(disc_segments.flat, band.inner)
        inside = oracles.covers(disc_segments.flat, band.inner)
        assert (inside | (dist <= 0.5)).all()

    def test_widths_clamped_to_radius_fraction(self, disc_segments):
        profile = flat_profile(512, 50.0)   # far beyond the radius
        _, radii = inscribed_circles(disc_segments)
        band = build_band(disc_segments, profile, radii=radii)
        depth = np.hypot(*(band.outer - band.inner).T)
        assert (depth <= 0.95 * radii + 1e-9).all()

    def test_px_per_unit_scales_inward_offset(self, disc_segments):
        band = build_band(disc_segments, flat_profile(512, 30.0), px_per_unit=100.0)
        depth = np.hypot(*(band.outer - band.inner).T)
        assert np.allclose(depth, 0.3)


class TestRenderSvg:
    def test_single_band_single_path(self, disc_segments):
        band = build_band(disc_segments, flat_profile(512, 0.1))
        svg = render_svg(default_spec(), [band])
        assert svg.count("<path") == 1
        assert 'fill-rule="evenodd"' in svg

    def test_six_series_six_colors(self, disc_segments):
        bands = [build_band(disc_segments, flat_profile(512, 0.1),
                            color=PALETTES["qual6"][i], series=f"s{i}")
                 for i in range(6)]
        svg = render_svg(default_spec(), bands)
        assert svg.count("<path") == 6
        for color in PALETTES["qual6"]:
            assert f'fill="{color}"' in svg

    def test_byte_determinism(self, disc_segments):
        rng = np.random.default_rng(1)
        widths = rng.uniform(0, 0.4, 512)
        profile = WidthProfile(raw=widths, smoothed=widths, window=1)
        band = build_band(disc_segments, profile)
        legend = LegendSpec(radial_profile=np.linspace(3, 1, 40),
                            width_bars=[WidthBar(8.0, 2.0, "2 P / SQU")])
        dots = DotLayer(points=rng.uniform(-1, 1, size=(50, 2)))
        heat = render_heat_reference(PointSet(rng.normal(0, 0.4, (300, 2))),
                                     bandwidth=0.2, grid=64)
        args = dict(bands=[band], legends=[(legend, "t", "#1b9e77")],
                    dots=[dots], heat=[heat])
        a = render_svg(default_spec(), **args)
        b = render_svg(default_spec(), **args)
        assert a == b

    def test_empty_scene_raises(self):
        with pytest.raises(EmptyScene):
            render_svg(default_spec(), [])

    def test_unknown_palette_rejected(self, disc_segments):
        band = build_band(disc_segments, flat_profile(512, 0.1))
        spec = default_spec()
        bad = RenderSpec(width=spec.width, height=spec.height,
                         transform=spec.transform, palette="nope")
        with pytest.raises(ValueError):
            render_svg(bad, [band])

    def test_numbers_fixed_precision(self, disc_segments):
        band = build_band(disc_segments, flat_profile(512, 0.1))
        svg = render_svg(default_spec(), [band])
        d = re.search(r' d="([^"]+)"', svg).group(1)
        pairs = [t for t in d.split() if t not in ("M", "Z", "L")]
        assert pairs
        for token in pairs:
            x, y = token.split(",")
            assert re.fullmatch(r"-?\d+\.\d{3}", x) and re.fullmatch(r"-?\d+\.\d{3}", y)


class TestTimeGradient:
    def bands(self, disc_segments, times):
        return [build_band(disc_segments, flat_profile(512, 0.1),
                           series="a", time=t) for t in times]

    def test_seven_steps_endpoint_colors(self, disc_segments):
        styled = render_time_gradient(self.bands(disc_segments,
                                                 [str(2000 + i) for i in range(7)]))
        assert styled[0].color == GRADIENT_START
        assert styled[-1].color == GRADIENT_END
        assert len({b.color for b in styled}) == 7

    def test_two_steps_exact_endpoints(self, disc_segments):
        styled = render_time_gradient(self.bands(disc_segments, ["a", "b"]))
        assert [b.color for b in styled] == [GRADIENT_START, GRADIENT_END]

    def test_reversed_input_same_colors_latest_on_top(self, disc_segments):
        fwd = render_time_gradient(self.bands(disc_segments, ["1", "2", "3"]))
        rev = render_time_gradient(self.bands(disc_segments, ["3", "2", "1"]))
        assert [b.color for b in fwd] == [b.color for b in rev]
        assert [b.time for b in fwd] == [b.time for b in rev] == ["1", "2", "3"]
        svg = render_svg(default_spec(), rev)
        order = re.findall(r'id="band-\d+-a-(\d)"', svg)
        assert order == ["1", "2", "3"]

    def test_needs_two_steps(self, disc_segments):
        with pytest.raises(ValueError):
            render_time_gradient(self.bands(disc_segments, ["only"]))


class TestLabLerp:
    def test_endpoints_exact(self):
        assert lab_lerp("#5b3a29", "#e0391e", 0.0) == "#5b3a29"
        assert lab_lerp("#5b3a29", "#e0391e", 1.0) == "#e0391e"

    def test_midpoint_between(self):
        mid = lab_lerp("#000000", "#ffffff", 0.5)
        r = int(mid[1:3], 16)
        assert 100 < r < 160   # perceptual gray, not numeric average 127 exactly
        assert mid[1:3] == mid[3:5] == mid[5:7]


class TestHeatReference:
    def test_single_point_blob_peaks_there(self):
        layer = render_heat_reference(PointSet(np.array([[2.0, 3.0]])),
                                      bandwidth=0.5, grid=65)
        gy, gx = np.unravel_index(np.argmax(layer.values), layer.values.shape)
        xmin, ymin, xmax, ymax = layer.extent
        x = xmin + (gx + 0.5) * (xmax - xmin) / 65
        y = ymax - (gy + 0.5) * (ymax - ymin) / 65
        assert abs(x - 2.0) < 0.1 and abs(y - 3.0) < 0.1
        mid = layer.values[gy]
        assert np.allclose(mid, mid[::-1], rtol=1e-6)   # radially symmetric row

    def test_grid_integral_matches_count(self):
        rng = np.random.default_rng(2)
        pts = PointSet(rng.normal(0, 1, size=(500, 2)))
        layer = render_heat_reference(pts, bandwidth=0.3, grid=256)
        xmin, ymin, xmax, ymax = layer.extent
        cell = (xmax - xmin) / 256 * (ymax - ymin) / 256
        integral = layer.values.sum() * cell
        assert integral == pytest.approx(500, rel=0.01)

    def test_large_bandwidth_flattens(self):
        rng = np.random.default_rng(3)
        pts = PointSet(rng.uniform(0, 1, size=(200, 2)))
        layer = render_heat_reference(pts, bandwidth=50.0, grid=64,
                                      extent=(0.0, 0.0, 1.0, 1.0))
        assert layer.values.max() / layer.values.min() < 1.5

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            render_heat_reference(PointSet(np.zeros((1, 2))), bandwidth=0.0)


class TestPngEncoder:
    def test_valid_signature_and_payload(self):
        rng = np.random.default_rng(4)
        img = rng.integers(0, 256, size=(16, 16, 4), dtype=np.uint8)
        png = encode_png_rgba(img)
        assert png.startswith(b"\x89PNG\r\n\x1a\n")
        idat = png.index(b"IDAT") + 4
        length = int.from_bytes(png[idat - 8:idat - 4], "big")
        raw = zlib.decompress(png[idat:idat + length])
        assert len(raw) == 16 * (1 + 16 * 4)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            encode_png_rgba(np.zeros((4, 4, 3), dtype=np.uint8))
