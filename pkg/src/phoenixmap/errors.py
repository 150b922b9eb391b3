"""Exception taxonomy shared by all phoenixmap modules."""


class PhoenixmapError(Exception):
    """Base class for all errors raised by this package."""


class TooFewPoints(PhoenixmapError):
    """Fewer than three points were supplied for an outline computation."""


class CollinearInput(PhoenixmapError):
    """All input points lie on a single line, no polygon exists."""


class OffsetSelfIntersection(PhoenixmapError):
    """Outward offset produced a self-intersecting polygon, shrink the offset."""


class DegenerateOutline(PhoenixmapError):
    """Outline has fewer than three distinct vertices."""


class BadSegmentCount(PhoenixmapError):
    """Requested segment count is below the supported minimum of 16."""


class DegenerateNormal(PhoenixmapError):
    """Inward normal probe immediately exits the region (near-zero-width neck)."""


class BadWindow(PhoenixmapError):
    """Sliding-window half-size outside [1, n/2]."""


class NonPositiveScale(PhoenixmapError):
    """Width scale factor must be strictly positive."""


class EmptyScene(PhoenixmapError):
    """Nothing to render: no bands, dots, heat layer or legend."""


class ParseError(PhoenixmapError):
    """Malformed input file. Carries the offending line or feature index."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonFiniteCoordinate(ParseError):
    """Input coordinate is NaN or infinite."""


class SelfIntersectingOutline(PhoenixmapError):
    """Predefined outline ring crosses itself."""


class TooFewVertices(PhoenixmapError):
    """Predefined outline ring has fewer than three distinct vertices."""


#: Errors that indicate bad user input rather than a geometry failure.
#: The CLI maps these to exit code 1, everything else to 2.
INPUT_ERRORS = (
    ParseError,
    SelfIntersectingOutline,
    TooFewVertices,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
