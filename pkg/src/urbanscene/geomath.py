"""WGS84 / Web Mercator transforms and planar polygon helpers.

Web Mercator here is the spherical EPSG:3857 variant with radius
6378137 m. All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateGeometryError, OutOfDomainError

EARTH_RADIUS = 6378137.0
MERCATOR_HALF_WORLD = math.pi * EARTH_RADIUS
MAX_LATITUDE = 85.06

WGS84 = 4326
WEB_MERCATOR = 3857


class GeoPoint(NamedTuple):
    lon: float
    lat: float


class MercatorPoint(NamedTuple):
    x: float
    y: float


class BBox(NamedTuple):
    """Axis-aligned box; units follow the CRS it was built in."""

    west: float
    south: float
    east: float
    north: float

    def validate(self) -> "BBox":
        if not all(math.isfinite(v) for v in self):
            raise DegenerateGeometryError(f"non-finite bbox {tuple(self)}")
        if not (self.west < self.east and self.south < self.north):
            raise DegenerateGeometryError(f"empty bbox {tuple(self)}")
        return self

    @property
    def width(self) -> float:
        return self.east - self.west

    @property
    def height(self) -> float:
        return self.north - self.south

    def intersects(self, other: "BBox") -> bool:
        return not (
            other.west > self.east
            or other.east < self.west
            or other.south > self.north
            or other.north < self.south
        )


def _unwrap(value):
    return value.item() if isinstance(value, np.ndarray) and value.ndim == 0 else value


def mercator_forward(lon, lat):
    """Project longitude/latitude degrees to Web Mercator meters.

    Returns ``(x, y)``; scalars in give floats out, arrays give arrays.
    Raises :class:`OutOfDomainError` when ``|lat| > 85.06``.
    """
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    if not (np.all(np.isfinite(lon)) and np.all(np.isfinite(lat))):
        raise OutOfDomainError("non-finite coordinate")
    if np.any(np.abs(lat) > MAX_LATITUDE):
        raise OutOfDomainError(f"latitude beyond +/-{MAX_LATITUDE} deg")
    if np.any(np.abs(lon) > 180.0):
        raise OutOfDomainError("longitude beyond +/-180 deg")
    x = EARTH_RADIUS * np.radians(lon)
    # atanh(sin(lat)) == ln(tan(pi/4 + lat/2)), but exact at the equator
    y = EARTH_RADIUS * np.arctanh(np.sin(np.radians(lat)))
    return _unwrap(x), _unwrap(y)


def mercator_inverse(x, y):
    """Inverse of :func:`mercator_forward`; returns ``(lon, lat)`` degrees."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise OutOfDomainError("non-finite coordinate")
    if np.any(np.abs(x) > MERCATOR_HALF_WORLD) or np.any(np.abs(y) > MERCATOR_HALF_WORLD):
        raise OutOfDomainError("mercator coordinate outside +/-pi*R")
    lon = np.degrees(x / EARTH_RADIUS)
    lat = np.degrees(np.arctan(np.sinh(y / EARTH_RADIUS)))
    return _unwrap(lon), _unwrap(lat)


def bbox_to_mercator(bbox: BBox) -> BBox:
    west, south = mercator_forward(bbox.west, bbox.south)
    east, north = mercator_forward(bbox.east, bbox.north)
    return BBox(west, south, east, north)


def bbox_to_geo(bbox: BBox) -> BBox:
    west, south = mercator_inverse(bbox.west, bbox.south)
    east, north = mercator_inverse(bbox.east, bbox.north)
    return BBox(west, south, east, north)


def envelope(coords) -> BBox:
    pts = np.asarray(coords, dtype=float)
    return BBox(
        float(pts[:, 0].min()), float(pts[:, 1].min()),
        float(pts[:, 0].max()), float(pts[:, 1].max()),
    )


@dataclass(frozen=True)
class Ring:
    """Closed polygon boundary stored without the repeated closing vertex."""

    coords: np.ndarray
    crs: int = WEB_MERCATOR

    def __post_init__(self):
        pts = np.array(self.coords, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DegenerateGeometryError("ring coordinates must have shape (n, 2)")
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 3:
            raise DegenerateGeometryError(f"ring needs >= 3 vertices, got {len(pts)}")
        pts.setflags(write=False)
        object.__setattr__(self, "coords", pts)

    def __len__(self):
        return len(self.coords)

    @property
    def bbox(self) -> BBox:
        return envelope(self.coords)

    def reversed(self) -> "Ring":
        return Ring(self.coords[::-1], self.crs)


def _ring_coords(ring) -> np.ndarray:
    if isinstance(ring, Ring):
        return ring.coords
    return Ring(ring).coords


class RingMetrics(NamedTuple):
    signed_area: float
    centroid: tuple[float, float]
    is_ccw: bool


def ring_metrics(ring: Ring | Sequence) -> RingMetrics:
    """Shoelace signed area, area-weighted centroid and orientation."""
    pts = _ring_coords(ring)
    # shift to the first vertex to limit cancellation on large mercator values
    ox, oy = float(pts[0, 0]), float(pts[0, 1])
    x = pts[:, 0] - ox
    y = pts[:, 1] - oy
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area2 = float(cross.sum())
    if area2 == 0.0 or not math.isfinite(area2):
        raise DegenerateGeometryError("ring has zero area")
    cx = float(((x + xn) * cross).sum()) / (3.0 * area2)
    cy = float(((y + yn) * cross).sum()) / (3.0 * area2)
    return RingMetrics(area2 / 2.0, (cx + ox, cy + oy), area2 > 0)


def ensure_ccw(ring: Ring) -> Ring:
    return ring if ring_metrics(ring).is_ccw else ring.reversed()


def point_in_ring(x, y, ring: Ring | Sequence):
    """Even-odd ray casting test.

    Points exactly on the boundary may be reported either way. Vectorized
    over ``x`` and ``y``.
    """
    pts = _ring_coords(ring)
    px = np.asarray(x, dtype=float)
    py = np.asarray(y, dtype=float)
    inside = np.zeros(np.broadcast(px, py).shape, dtype=bool)
    x0, y0 = pts[:, 0], pts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        straddles = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= straddles & (px < x_cross)
    return _unwrap(inside)


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient(*q1, *q2, *p1)
    d2 = _orient(*q1, *q2, *p2)
    d3 = _orient(*p1, *p2, *q1)
    d4 = _orient(*p1, *p2, *q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 and d2 and d3 and d4:
        return True

    def on_segment(a, b, c, d):
        return d == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return (
        on_segment(q1, q2, p1, d1)
        or on_segment(q1, q2, p2, d2)
        or on_segment(p1, p2, q1, d3)
        or on_segment(p1, p2, q2, d4)
    )


def is_simple(ring: Ring | Sequence) -> bool:
    """True when no two non-adjacent edges touch and no vertex repeats."""
    pts = [tuple(p) for p in _ring_coords(ring).tolist()]
    n = len(pts)
    if len(set(pts)) != n:
        return False
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(a1, a2, pts[j], pts[(j + 1) % n]):
                return False
    return True
