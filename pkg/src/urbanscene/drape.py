"""Drape 2-D road and power-line geometry onto the terrain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geomath import WEB_MERCATOR
from .raster import DemGrid, sample_bilinear

DEFAULT_SPACING = 10.0
ROAD_Z_OFFSET = 1.0
POWER_Z_OFFSET = 2.0


@dataclass(frozen=True)
class Polyline:
    """Open 2-D line in EPSG:3857 meters."""

    coords: np.ndarray
    kind: str = "road"
    attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.coords, dtype=float).reshape(-1, 2)
        if len(pts) < 2:
            raise ValueError("polyline needs at least 2 vertices")
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if len(pts) < 2:
            raise ValueError("polyline collapses to a single point")
        object.__setattr__(self, "coords", pts)


@dataclass
class Path3D:
    """Collection of 3-D line segments, each an ``(m, 3)`` array with m >= 2."""

    segments: list = field(default_factory=list)

    def __len__(self):
        return len(self.segments)

    @property
    def n_points(self) -> int:
        return sum(len(s) for s in self.segments)


def densify_polyline(line: Polyline, spacing: float = DEFAULT_SPACING) -> Polyline:
    """Split every edge of length L into ``ceil(L / spacing)`` equal parts.

    Original vertices are kept.
    """
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing!r}")
    pts = line.coords
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        length = math.hypot(*(b - a))
        # tolerance keeps exact multiples (10 m at 10 m spacing) from gaining a part
        parts = max(1, math.ceil(length / spacing - 1e-9))
        t = np.arange(1, parts + 1)[:, None] / parts
        seg = a + (b - a) * t
        seg[-1] = b
        out.append(seg)
    return Polyline(np.vstack(out), line.kind, dict(line.attrs))


def drape_polylines(
    lines,
    grid: DemGrid,
    spacing: float = DEFAULT_SPACING,
    z_offset: float = 0.0,
) -> Path3D:
    """Densify each line and lift it to ``terrain + z_offset``.

    Samples on nodata (or outside the grid) are dropped and split the line;
    runs shorter than two points are discarded. Horizontal coordinates are
    never modified.
    """
    if grid.crs != WEB_MERCATOR:
        raise ValueError(f"draping needs an EPSG:3857 grid, got EPSG:{grid.crs}")
    segments = []
    for line in lines:
        pts = densify_polyline(line, spacing).coords
        z = sample_bilinear(grid, pts[:, 0], pts[:, 1])
        ok = np.isfinite(z)
        for run in _true_runs(ok):
            if len(run) >= 2:
                segments.append(np.column_stack([pts[run], z[run] + z_offset]))
    return Path3D(segments)


def _true_runs(mask: np.ndarray):
    """Yield index arrays of maximal runs of True."""
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    for s, e in zip(starts, stops):
        yield np.arange(s, e)
