"""The scene pipeline shared by the HTTP service and the offline CLI."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from urllib.parse import unquote

from .. import geomath
from ..drape import Polyline, drape_polylines
from ..errors import (
    AreaTooLargeError,
    BadRequestError,
    NoElevationError,
    TriangulationError,
)
from ..extrude import extrude_building, footprint_base_elevation
from ..raster import DemGrid, mercator_grid_shape, parse_geotiff, reproject_to_mercator
from ..scene import FigureDoc, assemble_figure, serialize_figure
from ..sources import (
    DemClient,
    FileHeightProvider,
    Geocoder,
    HttpClient,
    HttpHeightProvider,
    NullHeightProvider,
    OverpassClient,
    assign_heights,
)
from ..terrain import build_terrain_mesh
from .cache import TTLCache
from .config import Config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SceneOptions:
    spacing: float = 10.0
    road_offset: float = 1.0
    power_offset: float = 2.0
    default_height: float = 8.0
    resolution: float | str = "auto"
    pixel_budget: int = 4_000_000
    title: str = ""

    @classmethod
    def from_config(cls, config: Config, title: str = "") -> "SceneOptions":
        return cls(
            spacing=config.spacing,
            road_offset=config.road_offset,
            power_offset=config.power_offset,
            default_height=config.default_height,
            resolution=config.resolution,
            pixel_budget=config.pixel_budget,
            title=title,
        )

    def cache_fingerprint(self) -> str:
        return f"{self.spacing!r}|{self.road_offset!r}|{self.power_offset!r}|{self.default_height!r}|{self.resolution!r}"


@dataclass
class SceneStats:
    vertices: int = 0
    triangles: int = 0
    traces: int = 0
    buildings: int = 0
    dropped_buildings: int = 0
    road_points: int = 0
    power_points: int = 0

    def summary(self) -> str:
        return (
            f"vertices={self.vertices} triangles={self.triangles} traces={self.traces} "
            f"buildings={self.buildings} dropped={self.dropped_buildings}"
        )


@dataclass
class SceneResult:
    figure: FigureDoc
    stats: SceneStats = field(default_factory=SceneStats)

    def to_json(self) -> bytes:
        return serialize_figure(self.figure).encode("utf-8")


def parse_place_slug(slug: str) -> str:
    """``"Alna-Oslo-Norway"`` -> ``"Alna, Oslo, Norway"``.

    Hyphens inside real place names cannot be expressed in a slug.
    """
    text = unquote(slug or "").strip()
    if "/" in text:
        raise BadRequestError("place slug must not contain '/'")
    query = text.replace("-", ", ").strip(" ,")
    if not query:
        raise BadRequestError("empty place slug")
    return query


def prepare_terrain(dem: DemGrid, options: SceneOptions) -> DemGrid:
    """Return the DEM in EPSG:3857, enforcing the pixel budget."""
    if dem.crs == geomath.WEB_MERCATOR:
        if dem.width * dem.height > options.pixel_budget:
            raise AreaTooLargeError(f"DEM has {dem.width * dem.height} pixels, budget {options.pixel_budget}")
        return dem
    h, w, _ = mercator_grid_shape(dem, options.resolution)
    if h * w > options.pixel_budget:
        raise AreaTooLargeError(f"projected DEM would have {h * w} pixels, budget {options.pixel_budget}")
    return reproject_to_mercator(dem, options.resolution)


def _polylines(ways, kind):
    lines = []
    for way in ways:
        try:
            lines.append(Polyline(way.mercator(), kind, {"id": way.id}))
        except ValueError as exc:
            logger.warning("skipping %s way %s: %s", kind, way.id, exc)
    return lines


def _footprints(ways):
    rings, ids = [], []
    for way in ways:
        try:
            ring = geomath.ensure_ccw(geomath.Ring(way.mercator()))
        except ValueError as exc:
            logger.warning("skipping building %s: %s", way.id, exc)
            continue
        if not geomath.is_simple(ring):
            logger.warning("skipping building %s: footprint is not simple", way.id)
            continue
        rings.append(ring)
        ids.append(way.id)
    return rings, ids


def build_scene(
    grid: DemGrid,
    roads=(),
    power=(),
    buildings=(),
    heights=(),
    options: SceneOptions = SceneOptions(),
) -> SceneResult:
    """Mesh, drape, extrude and assemble a scene from a Mercator DEM and OSM ways."""
    stats = SceneStats()
    terrain = build_terrain_mesh(grid)
    road_path = drape_polylines(_polylines(roads, "road"), grid, options.spacing, options.road_offset)
    power_path = drape_polylines(_polylines(power, "power"), grid, options.spacing, options.power_offset)

    rings, ids = _footprints(buildings)
    stats.dropped_buildings = len(buildings) - len(rings)
    meshes = []
    for b in assign_heights(rings, list(heights), options.default_height, ids):
        try:
            base = footprint_base_elevation(b.footprint, grid)
            meshes.append(extrude_building(replace(b, base_z=base)))
        except (NoElevationError, TriangulationError) as exc:
            logger.warning("dropping building %s: %s", b.way_id, exc)
            stats.dropped_buildings += 1

    figure = assemble_figure(terrain, road_path, power_path, meshes, title=options.title)
    stats.vertices = terrain.n_vertices + sum(m.n_vertices for m in meshes)
    stats.triangles = terrain.n_triangles + sum(m.n_triangles for m in meshes)
    stats.traces = len(figure.traces)
    stats.buildings = len(meshes)
    stats.road_points = road_path.n_points
    stats.power_points = power_path.n_points
    return SceneResult(figure, stats)


class SceneService:
    """Runs the full online pipeline for a place name, with caching."""

    def __init__(self, config: Config, http: HttpClient | None = None, height_provider=None):
        self.config = config
        self.http = http or HttpClient(
            max_retries=config.max_retries,
            backoff=config.backoff,
            timeout=config.timeout,
            default_limit=(0.0, config.upstream_concurrency),
        )
        self.http.set_limit(config.geocoder_url, config.geocoder_interval, 1)
        self.geocoder = Geocoder(config.geocoder_url, self.http, config.fallback_half_width)
        self.dem = DemClient(config.dem_url, self.http)
        self.overpass = OverpassClient(config.overpass_url, self.http)
        if height_provider is not None:
            self.heights = height_provider
        elif config.heights_mode == "file":
            self.heights = FileHeightProvider(config.heights_path)
        elif config.heights_mode == "http":
            self.heights = HttpHeightProvider(config.heights_url, self.http)
        else:
            self.heights = NullHeightProvider()
        self.cache = TTLCache(config.cache_ttl)
        self._slots = threading.BoundedSemaphore(config.max_pipelines)

    def generate(self, api_key: str, place_slug: str) -> bytes:
        """Figure JSON bytes for a place slug; served from cache when fresh."""
        if not api_key or "/" in api_key:
            raise BadRequestError("missing or malformed API key")
        query = parse_place_slug(place_slug)
        options = SceneOptions.from_config(self.config, title=query)
        key = f"{query.casefold()}|{options.cache_fingerprint()}"
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        with self._slots:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
            body = self._run(api_key, query, options)
            self.cache.put(key, body)
            return body

    def _run(self, api_key: str, query: str, options: SceneOptions) -> bytes:
        area = self.geocoder.geocode(query)
        bbox = area.bbox
        logger.info("geocoded %r to %s", query, tuple(bbox))
        dem = parse_geotiff(self.dem.fetch(bbox, api_key))
        grid = prepare_terrain(dem, options)
        roads = self.overpass.fetch_layer(bbox, "road")
        power = self.overpass.fetch_layer(bbox, "power")
        buildings = self.overpass.fetch_layer(bbox, "building")
        heights = self.heights.features(bbox)
        result = build_scene(grid, roads, power, buildings, heights, options)
        logger.info("built scene for %r: %s", query, result.stats.summary())
        return result.to_json()
