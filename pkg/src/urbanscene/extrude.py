"""Building footprints to closed prism meshes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geomath
from .errors import DegenerateGeometryError, NoElevationError, TriangulationError
from .geomath import Ring
from .raster import DemGrid, sample_bilinear
from .terrain import TriMesh

DEFAULT_HEIGHT = 8.0

# Heights and base elevations live on a 1/1024 m grid. Sums of two such
# values (below ~8.6e9 m) are exact doubles, so roof z - base z == height
# holds bit for bit.
Z_QUANTUM = 2.0**-10


@dataclass(frozen=True)
class Building:
    """Footprint plus vertical extent.

    ``height`` is rounded to the nearest multiple of :data:`Z_QUANTUM` and
    ``base_z`` is rounded down to one, so the base never rises above the
    elevation it was given.
    """

    footprint: Ring
    height: float
    base_z: float = 0.0
    way_id: int | None = None
    height_source: str = "default"  # "matched" or "default"

    def __post_init__(self):
        if not (self.height > 0 and math.isfinite(self.height)):
            raise ValueError(f"building height must be positive, got {self.height!r}")
        if not math.isfinite(self.base_z):
            raise ValueError(f"building base must be finite, got {self.base_z!r}")
        height = round(self.height / Z_QUANTUM) * Z_QUANTUM
        if height <= 0:
            raise ValueError(f"building height {self.height!r} rounds to zero")
        object.__setattr__(self, "height", height)
        object.__setattr__(self, "base_z", math.floor(self.base_z / Z_QUANTUM) * Z_QUANTUM)
        object.__setattr__(self, "footprint", geomath.ensure_ccw(self.footprint))


def footprint_base_elevation(ring: Ring, grid: DemGrid) -> float:
    """Lowest terrain sample over the footprint vertices.

    Vertices falling on nodata are ignored; :class:`NoElevationError` is
    raised when none has a valid sample.
    """
    pts = ring.coords
    z = sample_bilinear(grid, pts[:, 0], pts[:, 1])
    if not np.any(np.isfinite(z)):
        raise NoElevationError("no footprint vertex has a valid elevation")
    return float(np.nanmin(z))


def _cross(pts, a, b, c):
    (ax, ay), (bx, by), (cx, cy) = pts[a], pts[b], pts[c]
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _in_triangle(pts, p, a, b, c):
    """Closed containment test for a CCW triangle."""
    return _cross(pts, a, b, p) >= 0 and _cross(pts, b, c, p) >= 0 and _cross(pts, c, a, p) >= 0


def triangulate_ring(ring: Ring) -> np.ndarray:
    """Ear-clipping triangulation of a simple polygon.

    Returns an ``(n - 2, 3)`` array of indices into ``ring.coords``, each
    triangle counter-clockwise. Raises :class:`TriangulationError` for
    self-intersecting or zero-area rings.
    """
    pts = ring.coords
    n = len(pts)
    try:
        ccw = geomath.ring_metrics(ring).is_ccw
    except DegenerateGeometryError as exc:
        raise TriangulationError(str(exc)) from None
    if not geomath.is_simple(ring):
        raise TriangulationError("ring is not simple")
    order = list(range(n)) if ccw else list(range(n - 1, -1, -1))
    # work in CCW order, map back to ring indices at the end
    p = pts[order].tolist()

    prev = [(i - 1) % n for i in range(n)]
    nxt = [(i + 1) % n for i in range(n)]
    reflex = {i for i in range(n) if _cross(p, prev[i], i, nxt[i]) <= 0}

    def is_ear(i):
        a, c = prev[i], nxt[i]
        if _cross(p, a, i, c) <= 0:
            return False
        return not any(j not in (a, i, c) and _in_triangle(p, j, a, i, c) for j in reflex)

    tris = []
    remaining = n
    cur = 0
    misses = 0
    while remaining > 3:
        if is_ear(cur) or (misses >= remaining and _cross(p, prev[cur], cur, nxt[cur]) == 0):
            a, c = prev[cur], nxt[cur]
            tris.append((a, cur, c))
            nxt[a], prev[c] = c, a
            reflex.discard(cur)
            remaining -= 1
            for v in (a, c):
                if v in reflex and _cross(p, prev[v], v, nxt[v]) > 0:
                    reflex.discard(v)
            cur = c
            misses = 0
        else:
            cur = nxt[cur]
            misses += 1
            if misses > 2 * remaining:
                raise TriangulationError("no ear found; polygon is not simple")
    a = cur
    tris.append((prev[a], a, nxt[a]))
    return np.array([[order[i] for i in t] for t in tris], dtype=np.int64)


def extrude_building(b: Building) -> TriMesh:
    """Closed prism: base and roof caps plus two triangles per wall edge.

    Vertices ``0..n-1`` sit on the base at ``base_z``; ``n..2n-1`` are the
    matching roof vertices at ``base_z + height``. Faces point outward.
    """
    pts = b.footprint.coords
    n = len(pts)
    cap = triangulate_ring(b.footprint)
    roof = cap + n
    base = cap[:, ::-1]
    i = np.arange(n)
    j = (i + 1) % n
    walls = np.concatenate([
        np.column_stack([i, j, j + n]),
        np.column_stack([i, j + n, i + n]),
    ])
    xs = np.concatenate([pts[:, 0], pts[:, 0]])
    ys = np.concatenate([pts[:, 1], pts[:, 1]])
    zs = np.concatenate([np.full(n, b.base_z), np.full(n, b.base_z + b.height)])
    return TriMesh(xs, ys, zs, np.concatenate([base, roof, walls]))
