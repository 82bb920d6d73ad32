"""Per-pixel triangulation of a Web Mercator elevation grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMeshError
from .geomath import WEB_MERCATOR
from .raster import DemGrid


@dataclass(frozen=True)
class TriMesh:
    """Indexed triangle mesh with parallel coordinate arrays."""

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    tris: np.ndarray

    def __post_init__(self):
        xs, ys, zs = (np.asarray(a, dtype=float).ravel() for a in (self.xs, self.ys, self.zs))
        tris = np.asarray(self.tris, dtype=np.int64).reshape(-1, 3)
        if not (len(xs) == len(ys) == len(zs)):
            raise ValueError("coordinate arrays differ in length")
        if len(tris) and (tris.min() < 0 or tris.max() >= len(xs)):
            raise ValueError("triangle index out of range")
        if len(tris) and np.any(
            (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
        ):
            raise ValueError("degenerate triangle with repeated index")
        for name, arr in (("xs", xs), ("ys", ys), ("zs", zs), ("tris", tris)):
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self) -> int:
        return len(self.xs)

    @property
    def n_triangles(self) -> int:
        return len(self.tris)

    def vertices(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys, self.zs])


def build_terrain_mesh(grid: DemGrid) -> TriMesh:
    """Triangulate a Mercator DEM.

    One vertex is placed at the center of every valid pixel (row-major
    order). Each 2x2 block of valid pixels becomes two triangles split along
    the top-left to bottom-right diagonal, wound counter-clockwise seen from
    above. Blocks touching a nodata pixel are skipped.
    """
    if grid.crs != WEB_MERCATOR:
        raise ValueError(f"terrain meshing needs an EPSG:3857 grid, got EPSG:{grid.crs}")
    valid = grid.valid_mask
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise EmptyMeshError("grid has no valid pixels")

    index = np.full(valid.shape, -1, dtype=np.int64)
    index[valid] = np.arange(n_valid)
    cx, cy = grid.pixel_centers()

    tl = index[:-1, :-1]
    tr = index[:-1, 1:]
    bl = index[1:, :-1]
    br = index[1:, 1:]
    quad_ok = (tl >= 0) & (tr >= 0) & (bl >= 0) & (br >= 0)
    tl, tr, bl, br = tl[quad_ok], tr[quad_ok], bl[quad_ok], br[quad_ok]
    tris = np.stack(
        [np.column_stack([tl, bl, br]), np.column_stack([tl, br, tr])], axis=1
    ).reshape(-1, 3)

    return TriMesh(cx[valid], cy[valid], grid.values[valid], tris)
