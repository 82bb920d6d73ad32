"""Exception hierarchy shared by all pipeline stages."""


class UrbanSceneError(Exception):
    """Base class for every error raised by this package."""


class OutOfDomainError(UrbanSceneError, ValueError):
    """Coordinate outside the domain of a projection."""


class DegenerateGeometryError(UrbanSceneError, ValueError):
    """Polygon with zero area or too few vertices."""


class TriangulationError(UrbanSceneError, ValueError):
    """Polygon could not be triangulated (self-intersecting or degenerate)."""


class ParseError(UrbanSceneError, ValueError):
    """Malformed input file or upstream payload."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFeatureError(UrbanSceneError, ValueError):
    """Input uses a file-format feature outside the supported subset."""

    def __init__(self, feature):
        self.feature = feature
        super().__init__(f"unsupported feature: {feature}")


class EmptyRasterError(UrbanSceneError):
    """A raster operation produced no valid pixels."""


class EmptyMeshError(UrbanSceneError):
    """A mesh could not be built because there were no valid vertices."""


class EmptySceneError(UrbanSceneError):
    """A figure cannot be assembled without terrain."""


class NoElevationError(UrbanSceneError):
    """No valid elevation sample was found for a footprint."""


class SerializationError(UrbanSceneError, ValueError):
    """A figure contains values that cannot be written as JSON."""


class UpstreamError(UrbanSceneError):
    """An upstream HTTP service failed or returned an unusable response."""

    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)


class InvalidKeyError(UpstreamError):
    """The DEM provider rejected the API key."""


class PlaceNotFoundError(UrbanSceneError):
    """The geocoder returned no result for the query."""


class BadRequestError(UrbanSceneError, ValueError):
    """Client request could not be interpreted."""


class AreaTooLargeError(UrbanSceneError):
    """The requested area exceeds the configured raster pixel budget."""
