"""Phoenixmap: closed outlines whose stroke width encodes interior point density."""

__version__ = "0.1.0"

from .errors import (BadSegmentCount, BadWindow, CollinearInput,
                     DegenerateNormal, DegenerateOutline, EmptyScene,
                     NonFiniteCoordinate, NonPositiveScale,
                     OffsetSelfIntersection, ParseError, PhoenixmapError,
                     SelfIntersectingOutline, TooFewPoints, TooFewVertices)
from .geometry import (Outline, PointSet, concave_hull, convex_hull,
                       densify_outline, offset_outline, point_in_polygon,
                       polygon_area)
from .curve import ClosedCurve, SegmentedCurve, fit_closed_bezier, segment_curve
from .density import (InscribedCircle, SegmentSlice, WidthProfile,
                      build_slices, inscribed_circle_at, inscribed_circles,
                      scale_widths, smooth_widths)
from .legend import LegendSpec, WidthBar, radial_profile, width_bars
from .render import (DotLayer, HeatLayer, PhoenixBand, RenderSpec, Transform,
                     build_band, render_heat_reference, render_svg,
                     render_time_gradient)
from .io import SeriesTable, generate_synthetic, load_outline, load_points
from .pipeline import Config, PipelineResult, render_from_sidecar, run_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
