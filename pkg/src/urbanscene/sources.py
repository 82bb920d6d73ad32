"""Clients for the upstream open-data services and the height join.

Every base URL is configurable so tests can point the clients at local
mock servers. Requests go through :class:`HttpClient`, which enforces a
per-host minimum interval and concurrency cap and retries transient
failures with exponential backoff.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from urllib.parse import urlsplit

import numpy as np
import requests

from . import geomath
from .errors import InvalidKeyError, ParseError, PlaceNotFoundError, UpstreamError
from .extrude import DEFAULT_HEIGHT, Building
from .geomath import BBox, Ring

logger = logging.getLogger(__name__)

USER_AGENT = "urbanscene/0.1 (3D urban scene generator)"

DRIVABLE_HIGHWAYS = (
    "motorway", "trunk", "primary", "secondary", "tertiary", "unclassified",
    "residential", "service", "living_street",
    "motorway_link", "trunk_link", "primary_link", "secondary_link", "tertiary_link",
)
POWER_TAGS = ("line", "minor_line", "cable", "major_line")
LAYERS = ("road", "power", "building")


# --------------------------------------------------------------------------
# HTTP plumbing


class HostLimiter:
    """Minimum spacing between request starts plus a concurrency cap."""

    def __init__(self, min_interval: float = 0.0, max_concurrent: int = 1):
        self.min_interval = min_interval
        self._sem = threading.BoundedSemaphore(max_concurrent)
        self._lock = threading.Lock()
        self._next_start = 0.0

    @contextmanager
    def slot(self):
        with self._sem:
            with self._lock:
                now = time.monotonic()
                start = max(now, self._next_start)
                self._next_start = start + self.min_interval
            if start > now:
                time.sleep(start - now)
            yield


class HttpClient:
    """Thin wrapper over :class:`requests.Session` shared by all clients.

    ``limits`` maps a host name to ``(min_interval_s, max_concurrent)``;
    hosts not listed get ``default_limit``.
    """

    def __init__(
        self,
        limits: dict | None = None,
        default_limit: tuple[float, int] = (0.0, 1),
        max_retries: int = 2,
        backoff: float = 0.5,
        timeout: float = 60.0,
        user_agent: str = USER_AGENT,
    ):
        self.session = requests.Session()
        self.session.headers["User-Agent"] = user_agent
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self._default_limit = default_limit
        self._limits = dict(limits or {})
        self._limiters: dict[str, HostLimiter] = {}
        self._guard = threading.Lock()

    def limiter(self, host: str) -> HostLimiter:
        with self._guard:
            if host not in self._limiters:
                self._limiters[host] = HostLimiter(*self._limits.get(host, self._default_limit))
            return self._limiters[host]

    def set_limit(self, url: str, min_interval: float, max_concurrent: int):
        host = urlsplit(url).netloc
        with self._guard:
            self._limits[host] = (min_interval, max_concurrent)
            self._limiters.pop(host, None)

    def request(self, method: str, url: str, **kwargs) -> requests.Response:
        """Send with throttling and retries; returns the final response.

        Connection errors, 429 and 5xx are retried up to ``max_retries``
        times. HTTP error statuses are returned, not raised.
        """
        limiter = self.limiter(urlsplit(url).netloc)
        kwargs.setdefault("timeout", self.timeout)
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with limiter.slot():
                    resp = self.session.request(method, url, **kwargs)
            except requests.RequestException as exc:
                if attempt == self.max_retries:
                    raise UpstreamError(f"{method} {url} failed: {exc}") from exc
                continue
            if (resp.status_code == 429 or resp.status_code >= 500) and attempt < self.max_retries:
                continue
            return resp
        raise AssertionError("unreachable")


def _check(resp: requests.Response, service: str):
    if resp.status_code >= 400:
        raise UpstreamError(f"{service} returned HTTP {resp.status_code}", status=resp.status_code)


def _json(resp: requests.Response, service: str):
    try:
        return resp.json()
    except ValueError:
        raise ParseError(f"{service} returned malformed JSON") from None


# --------------------------------------------------------------------------
# geocoder


@dataclass(frozen=True)
class GeocodedArea:
    display_name: str
    boundary: Ring
    bbox: BBox


def _square_around(lon: float, lat: float, half_width: float) -> list[tuple[float, float]]:
    x, y = geomath.mercator_forward(lon, lat)
    lons, lats = geomath.mercator_inverse(
        [x - half_width, x + half_width], [y - half_width, y + half_width]
    )
    w, e = lons
    s, n = lats
    return [(w, s), (e, s), (e, n), (w, n)]


def _outer_ring(geometry: dict, fallback_half_width: float):
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        return coords[0]
    if gtype == "MultiPolygon":
        # largest member polygon
        return max((poly[0] for poly in coords), key=lambda r: abs(geomath.ring_metrics(r).signed_area))
    if gtype == "Point":
        return _square_around(coords[0], coords[1], fallback_half_width)
    if gtype in ("LineString", "MultiPoint"):
        bb = geomath.envelope(coords)
        if bb.width > 0 and bb.height > 0:
            return [(bb.west, bb.south), (bb.east, bb.south), (bb.east, bb.north), (bb.west, bb.north)]
        return _square_around(coords[0][0], coords[0][1], fallback_half_width)
    raise ParseError(f"unsupported geocoder geometry {gtype!r}")


class Geocoder:
    """Nominatim-style place search returning a polygon boundary."""

    def __init__(self, base_url: str, http: HttpClient, fallback_half_width: float = 1000.0):
        self.base_url = base_url.rstrip("/")
        self.http = http
        self.fallback_half_width = fallback_half_width

    def geocode(self, query: str) -> GeocodedArea:
        if not query.strip():
            raise ValueError("empty place name")
        resp = self.http.request(
            "GET",
            f"{self.base_url}/search",
            params={"q": query, "format": "geojson", "polygon_geojson": 1, "limit": 1},
        )
        _check(resp, "geocoder")
        payload = _json(resp, "geocoder")
        features = payload.get("features") if isinstance(payload, dict) else None
        if not features:
            raise PlaceNotFoundError(f"no geocoding result for {query!r}")
        feature = features[0]
        try:
            ring = Ring(_outer_ring(feature["geometry"], self.fallback_half_width), crs=geomath.WGS84)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ParseError(f"malformed geocoder feature: {exc}") from None
        name = (feature.get("properties") or {}).get("display_name", query)
        return GeocodedArea(name, ring, ring.bbox.validate())


# --------------------------------------------------------------------------
# DEM


class DemClient:
    """OpenTopography global DEM download (Copernicus 30 m)."""

    def __init__(self, base_url: str, http: HttpClient, demtype: str = "COP30"):
        self.base_url = base_url.rstrip("/")
        self.http = http
        self.demtype = demtype

    def params(self, bbox: BBox, api_key: str) -> dict:
        return {
            "demtype": self.demtype,
            "south": repr(bbox.south),
            "north": repr(bbox.north),
            "west": repr(bbox.west),
            "east": repr(bbox.east),
            "outputFormat": "GTiff",
            "API_Key": api_key,
        }

    def fetch(self, bbox: BBox, api_key: str) -> bytes:
        """Return the raw GeoTIFF bytes for ``bbox`` (EPSG:4326)."""
        bbox.validate()
        if not api_key:
            raise ValueError("empty API key")
        resp = self.http.request("GET", f"{self.base_url}/API/globaldem", params=self.params(bbox, api_key))
        if resp.status_code == 401:
            raise InvalidKeyError("DEM provider rejected the API key", status=401)
        _check(resp, "DEM provider")
        return resp.content


# --------------------------------------------------------------------------
# OpenStreetMap


@dataclass(frozen=True)
class OsmWay:
    id: int
    coords: list  # (lon, lat) pairs
    tags: dict = field(default_factory=dict)
    node_ids: tuple | None = None

    @property
    def closed(self) -> bool:
        if self.node_ids:
            return self.node_ids[0] == self.node_ids[-1]
        return len(self.coords) > 2 and tuple(self.coords[0]) == tuple(self.coords[-1])

    def mercator(self) -> np.ndarray:
        pts = np.asarray(self.coords, dtype=float)
        x, y = geomath.mercator_forward(pts[:, 0], pts[:, 1])
        return np.column_stack([x, y])


def _fmt_coord(v: float) -> str:
    return f"{v:.7f}"


def build_overpass_query(bbox: BBox, layer: str) -> str:
    """Overpass QL for one layer; deterministic for a given bbox."""
    bbox.validate()
    box = ",".join(_fmt_coord(v) for v in (bbox.south, bbox.west, bbox.north, bbox.east))
    if layer == "road":
        pattern = "|".join(DRIVABLE_HIGHWAYS)
        clauses = [f'way["highway"~"^({pattern})$"]({box});']
    elif layer == "power":
        clauses = [f'way["power"="{tag}"]({box});' for tag in POWER_TAGS]
    elif layer == "building":
        clauses = [f'way["building"]({box});']
    else:
        raise ValueError(f"unknown layer {layer!r}")
    body = "\n".join("  " + c for c in clauses)
    return f"[out:json][timeout:60];\n(\n{body}\n);\nout body;\n>;\nout skel qt;\n"


def parse_overpass_json(payload, layer: str | None = None) -> list[OsmWay]:
    """Resolve way node references into coordinates.

    Ways that reference unknown nodes are dropped with a warning. For the
    building layer only closed ways are kept.
    """
    if isinstance(payload, (bytes, str)):
        try:
            payload = json.loads(payload)
        except ValueError:
            raise ParseError("Overpass response is not valid JSON") from None
    try:
        elements = payload["elements"]
        nodes = {el["id"]: (float(el["lon"]), float(el["lat"])) for el in elements if el.get("type") == "node"}
        ways = []
        for el in elements:
            if el.get("type") != "way":
                continue
            refs = el.get("nodes", [])
            missing = [r for r in refs if r not in nodes]
            if missing:
                logger.warning("dropping way %s: %d missing node(s)", el.get("id"), len(missing))
                continue
            if len(refs) < 2:
                continue
            way = OsmWay(int(el["id"]), [nodes[r] for r in refs], dict(el.get("tags", {})), tuple(refs))
            if layer == "building" and not way.closed:
                continue
            ways.append(way)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed Overpass response: {exc}") from None
    return ways


def parse_geojson_ways(payload, layer: str | None = None) -> list[OsmWay]:
    """Read LineString/Polygon features (lon/lat) as ways."""
    if isinstance(payload, (bytes, str)):
        try:
            payload = json.loads(payload)
        except ValueError:
            raise ParseError("GeoJSON is not valid JSON") from None
    ways = []
    try:
        for n, feat in enumerate(payload["features"]):
            geom = feat.get("geometry") or {}
            props = feat.get("properties") or {}
            way_id = feat.get("id", props.get("id", n))
            gtype = geom.get("type")
            if gtype == "LineString":
                parts = [geom["coordinates"]]
            elif gtype == "MultiLineString":
                parts = geom["coordinates"]
            elif gtype == "Polygon":
                parts = [geom["coordinates"][0]]
            elif gtype == "MultiPolygon":
                parts = [poly[0] for poly in geom["coordinates"]]
            else:
                continue
            for coords in parts:
                if len(coords) < 2:
                    continue
                way = OsmWay(int(way_id), [(float(c[0]), float(c[1])) for c in coords], dict(props))
                if layer == "building" and not way.closed:
                    continue
                ways.append(way)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed GeoJSON: {exc}") from None
    return ways


def load_ways(path, layer: str | None = None) -> list[OsmWay]:
    """Load an Overpass JSON dump or a GeoJSON FeatureCollection."""
    with open(path, "rb") as fh:
        try:
            payload = json.load(fh)
        except ValueError:
            raise ParseError(f"{path}: not valid JSON") from None
    if isinstance(payload, dict) and "elements" in payload:
        return parse_overpass_json(payload, layer)
    if isinstance(payload, dict) and "features" in payload:
        return parse_geojson_ways(payload, layer)
    raise ParseError(f"{path}: neither Overpass JSON nor a GeoJSON FeatureCollection")


class OverpassClient:
    def __init__(self, url: str, http: HttpClient):
        self.url = url
        self.http = http

    def fetch_layer(self, bbox: BBox, layer: str) -> list[OsmWay]:
        resp = self.http.request("POST", self.url, data={"data": build_overpass_query(bbox, layer)})
        _check(resp, "Overpass")
        return parse_overpass_json(resp.content, layer)


# --------------------------------------------------------------------------
# building heights


@dataclass(frozen=True)
class HeightFeature:
    ring: Ring
    height: float


def parse_height_geojson(payload) -> list[HeightFeature]:
    """Height polygons from a GeoJSON FeatureCollection, returned in EPSG:3857.

    Coordinates are lon/lat unless the legacy ``crs`` member names 3857.
    Features without a positive numeric ``height`` property are skipped.
    """
    if isinstance(payload, (bytes, str)):
        try:
            payload = json.loads(payload)
        except ValueError:
            raise ParseError("height GeoJSON is not valid JSON") from None
    crs_name = str(((payload.get("crs") or {}).get("properties") or {}).get("name", ""))
    projected = "3857" in crs_name or "900913" in crs_name
    out = []
    try:
        for feat in payload["features"]:
            height = (feat.get("properties") or {}).get("height")
            if isinstance(height, bool) or not isinstance(height, (int, float)) or not height > 0:
                continue
            geom = feat.get("geometry") or {}
            if geom.get("type") == "Polygon":
                rings = [geom["coordinates"][0]]
            elif geom.get("type") == "MultiPolygon":
                rings = [poly[0] for poly in geom["coordinates"]]
            else:
                continue
            for coords in rings:
                pts = np.asarray(coords, dtype=float)[:, :2]
                if not projected:
                    x, y = geomath.mercator_forward(pts[:, 0], pts[:, 1])
                    pts = np.column_stack([x, y])
                try:
                    out.append(HeightFeature(Ring(pts), float(height)))
                except ValueError:
                    continue
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed height GeoJSON: {exc}") from None
    return out


class FileHeightProvider:
    """Height polygons from a local GeoJSON file (loaded once)."""

    def __init__(self, path):
        self.path = path
        with open(path, "rb") as fh:
            self._features = parse_height_geojson(fh.read())

    def features(self, bbox: BBox | None = None) -> list[HeightFeature]:
        if bbox is None:
            return list(self._features)
        mb = geomath.bbox_to_mercator(bbox)
        return [f for f in self._features if f.ring.bbox.intersects(mb)]


class HttpHeightProvider:
    """Height polygons served as GeoJSON by ``GET <url>?bbox=w,s,e,n``."""

    def __init__(self, url: str, http: HttpClient):
        self.url = url
        self.http = http

    def features(self, bbox: BBox) -> list[HeightFeature]:
        resp = self.http.request("GET", self.url, params={"bbox": ",".join(repr(v) for v in bbox)})
        _check(resp, "height provider")
        return parse_height_geojson(resp.content)


class NullHeightProvider:
    def features(self, bbox=None) -> list[HeightFeature]:
        return []


def assign_heights(footprints, features, default_h: float = DEFAULT_HEIGHT, way_ids=None) -> list[Building]:
    """Attach a height to every footprint.

    A footprint takes the height of the feature whose polygon contains the
    footprint centroid; when several do, the feature with the nearest
    centroid wins. Unmatched footprints get ``default_h``.
    """
    if not default_h > 0:
        raise ValueError(f"default height must be positive, got {default_h!r}")
    feat_boxes = [f.ring.bbox for f in features]
    feat_centroids = [geomath.ring_metrics(f.ring).centroid for f in features]
    buildings = []
    for n, ring in enumerate(footprints):
        cx, cy = geomath.ring_metrics(ring).centroid
        best, best_d2 = None, None
        for f, bb, (fx, fy) in zip(features, feat_boxes, feat_centroids):
            if not (bb.west <= cx <= bb.east and bb.south <= cy <= bb.north):
                continue
            if not geomath.point_in_ring(cx, cy, f.ring):
                continue
            d2 = (fx - cx) ** 2 + (fy - cy) ** 2
            if best is None or d2 < best_d2:
                best, best_d2 = f, d2
        way_id = way_ids[n] if way_ids is not None else None
        if best is None:
            buildings.append(Building(ring, default_h, way_id=way_id, height_source="default"))
        else:
            buildings.append(Building(ring, best.height, way_id=way_id, height_source="matched"))
    return buildings
