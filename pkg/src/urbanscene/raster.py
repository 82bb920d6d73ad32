"""Single-band elevation rasters: parsing, bilinear sampling, reprojection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geomath
from .errors import EmptyRasterError, OutOfDomainError, ParseError
from .geotiff import read_geotiff

DEFAULT_ASCII_NODATA = -9999.0
# snap tolerance, in pixels, for queries that land on a pixel center
_CENTER_SNAP = 1e-9


@dataclass(frozen=True)
class DemGrid:
    """North-up elevation raster.

    ``origin_x``/``origin_y`` is the outer top-left corner of pixel (0, 0);
    rows advance southward by ``pixel_h``. ``values`` has shape
    ``(height, width)``. ``nodata`` is the sentinel marking missing cells
    (NaN cells are always treated as missing).
    """

    crs: int
    origin_x: float
    origin_y: float
    pixel_w: float
    pixel_h: float
    values: np.ndarray
    nodata: float | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("values must be a non-empty 2-D array")
        if not (self.pixel_w > 0 and self.pixel_h > 0):
            raise ValueError("pixel sizes must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_mask(self) -> np.ndarray:
        mask = np.isfinite(self.values)
        if self.nodata is not None and not math.isnan(self.nodata):
            mask &= self.values != self.nodata
        return mask

    @property
    def bbox(self) -> geomath.BBox:
        """Outer extent of the raster."""
        return geomath.BBox(
            self.origin_x,
            self.origin_y - self.height * self.pixel_h,
            self.origin_x + self.width * self.pixel_w,
            self.origin_y,
        )

    def pixel_centers(self):
        """Return ``(xs, ys)`` arrays of shape ``(height, width)``."""
        cols = self.origin_x + (np.arange(self.width) + 0.5) * self.pixel_w
        rows = self.origin_y - (np.arange(self.height) + 0.5) * self.pixel_h
        return np.meshgrid(cols, rows)


# --------------------------------------------------------------------------
# ESRI ASCII grid

_ASCII_KEYS = {"ncols", "nrows", "xllcorner", "xllcenter", "yllcorner", "yllcenter", "cellsize", "nodata_value"}


def parse_ascii_grid(text, crs: int = geomath.WGS84) -> DemGrid:
    """Parse an ESRI ASCII grid (``.asc``) from bytes or str."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    lines = text.splitlines()
    header: dict[str, float] = {}
    lineno = 0
    while lineno < len(lines):
        parts = lines[lineno].split()
        if not parts:
            lineno += 1
            continue
        key = parts[0].lower()
        if key not in _ASCII_KEYS:
            break
        if len(parts) != 2:
            raise ParseError(f"malformed header entry {lines[lineno]!r}", lineno + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric header value {parts[1]!r}", lineno + 1) from None
        lineno += 1

    for key in ("ncols", "nrows", "cellsize"):
        if key not in header:
            raise ParseError(f"missing header key {key!r}", lineno + 1)
    if "xllcorner" not in header and "xllcenter" not in header:
        raise ParseError("missing header key 'xllcorner'", lineno + 1)
    if "yllcorner" not in header and "yllcenter" not in header:
        raise ParseError("missing header key 'yllcorner'", lineno + 1)

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    cell = header["cellsize"]
    if ncols <= 0 or nrows <= 0 or cell <= 0:
        raise ParseError("ncols, nrows and cellsize must be positive")
    west = header["xllcorner"] if "xllcorner" in header else header["xllcenter"] - cell / 2
    south = header["yllcorner"] if "yllcorner" in header else header["yllcenter"] - cell / 2
    nodata = header.get("nodata_value", DEFAULT_ASCII_NODATA)

    rows = []
    for idx in range(lineno, len(lines)):
        parts = lines[idx].split()
        if not parts:
            continue
        if len(rows) == nrows:
            raise ParseError(f"more than {nrows} data rows", idx + 1)
        if len(parts) != ncols:
            raise ParseError(f"expected {ncols} values, found {len(parts)}", idx + 1)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            bad = next(p for p in parts if not _is_float(p))
            raise ParseError(f"non-numeric cell {bad!r}", idx + 1) from None
    if len(rows) != nrows:
        raise ParseError(f"expected {nrows} data rows, found {len(rows)}", len(lines))

    return DemGrid(
        crs=crs,
        origin_x=west,
        origin_y=south + nrows * cell,
        pixel_w=cell,
        pixel_h=cell,
        values=np.array(rows),
        nodata=nodata,
    )


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def write_ascii_grid(grid: DemGrid) -> str:
    """Serialize a square-pixel grid as an ESRI ASCII grid."""
    if grid.pixel_w != grid.pixel_h:
        raise ValueError("ASCII grids require square pixels")
    values = np.where(grid.valid_mask, grid.values, grid.nodata if grid.nodata is not None else DEFAULT_ASCII_NODATA)
    out = [
        f"ncols {grid.width}",
        f"nrows {grid.height}",
        f"xllcorner {_fmt(grid.origin_x)}",
        f"yllcorner {_fmt(grid.bbox.south)}",
        f"cellsize {_fmt(grid.pixel_w)}",
        f"NODATA_value {_fmt(grid.nodata if grid.nodata is not None else DEFAULT_ASCII_NODATA)}",
    ]
    out += [" ".join(_fmt(v) for v in row) for row in values.tolist()]
    return "\n".join(out) + "\n"


def parse_geotiff(data) -> DemGrid:
    """Parse a single-band EPSG:4326 GeoTIFF into a grid.

    See :func:`urbanscene.geotiff.read_geotiff` for the supported subset.
    """
    img = read_geotiff(bytes(data))
    return DemGrid(
        crs=geomath.WGS84,
        origin_x=img.origin_x,
        origin_y=img.origin_y,
        pixel_w=img.pixel_w,
        pixel_h=img.pixel_h,
        values=img.values,
        nodata=img.nodata,
    )


def load_dem(path, crs: int = geomath.WGS84) -> DemGrid:
    """Read a GeoTIFF or ASCII grid from disk, picking the parser by content."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] in (b"II*\x00", b"MM\x00*", b"II+\x00", b"MM\x00+"):
        return parse_geotiff(data)
    return parse_ascii_grid(data, crs=crs)


# --------------------------------------------------------------------------
# sampling


def sample_bilinear(grid: DemGrid, x, y):
    """Bilinear elevation at ``(x, y)`` in the grid's CRS.

    Blends the four surrounding pixel-center values. Returns NaN (the nodata
    outcome) outside the hull of pixel centers or when any pixel with a
    non-zero weight is nodata. Queries on a pixel center return that pixel's
    value exactly. Vectorized over ``x`` and ``y``.
    """
    qx = np.asarray(x, dtype=float)
    qy = np.asarray(y, dtype=float)
    qx, qy = np.broadcast_arrays(qx, qy)
    fc = (qx - grid.origin_x) / grid.pixel_w - 0.5
    fr = (grid.origin_y - qy) / grid.pixel_h - 0.5
    fc = np.where(np.abs(fc - np.round(fc)) < _CENTER_SNAP, np.round(fc), fc)
    fr = np.where(np.abs(fr - np.round(fr)) < _CENTER_SNAP, np.round(fr), fr)

    inside = (fc >= 0) & (fc <= grid.width - 1) & (fr >= 0) & (fr <= grid.height - 1)
    fc = np.where(inside, fc, 0.0)
    fr = np.where(inside, fr, 0.0)
    c0 = np.clip(np.floor(fc).astype(int), 0, max(grid.width - 2, 0))
    r0 = np.clip(np.floor(fr).astype(int), 0, max(grid.height - 2, 0))
    c1 = np.minimum(c0 + 1, grid.width - 1)
    r1 = np.minimum(r0 + 1, grid.height - 1)
    tx = fc - c0
    ty = fr - r0

    valid = grid.valid_mask
    # placeholder 0 for invalid cells keeps zero-weight products finite
    vals = np.where(valid, grid.values, 0.0)
    ok = inside.copy()
    for r, c, w in (
        (r0, c0, (1 - tx) * (1 - ty)),
        (r0, c1, tx * (1 - ty)),
        (r1, c0, (1 - tx) * ty),
        (r1, c1, tx * ty),
    ):
        ok &= (w == 0) | valid[r, c]
    # nested lerps reproduce equal neighbours exactly (constant fields stay constant)
    top = vals[r0, c0] + tx * (vals[r0, c1] - vals[r0, c0])
    bottom = vals[r1, c0] + tx * (vals[r1, c1] - vals[r1, c0])
    result = top + ty * (bottom - top)
    result = np.where(ok, result, np.nan)
    return result.item() if result.ndim == 0 else result


# --------------------------------------------------------------------------
# reprojection


def auto_resolution(src: DemGrid) -> float:
    """Mercator pixel size matching the source row spacing at mid-latitude.

    One source row spans ``pixel_h`` degrees of latitude, i.e.
    ``pixel_h * pi * R / 180`` meters on the ground, which Web Mercator
    stretches by ``1 / cos(lat)``.
    """
    bb = src.bbox
    lat_c = math.radians((bb.south + bb.north) / 2.0)
    ground = src.pixel_h * math.pi * geomath.EARTH_RADIUS / 180.0
    return ground / math.cos(lat_c)


def mercator_grid_shape(src: DemGrid, target_res: float | str | None = "auto") -> tuple[int, int, float]:
    """Return ``(height, width, resolution)`` of the reprojected grid."""
    res = _resolve_resolution(src, target_res)
    mb = geomath.bbox_to_mercator(src.bbox)
    width = max(1, math.ceil(mb.width / res - 1e-9))
    height = max(1, math.ceil(mb.height / res - 1e-9))
    return height, width, res


def _resolve_resolution(src, target_res):
    if target_res is None or target_res == "auto":
        return auto_resolution(src)
    res = float(target_res)
    if not res > 0:
        raise ValueError(f"resolution must be positive, got {target_res!r}")
    return res


def reproject_to_mercator(src: DemGrid, target_res: float | str | None = "auto") -> DemGrid:
    """Resample an EPSG:4326 grid onto a square-pixel EPSG:3857 grid.

    Every output pixel center is inverse-projected to lon/lat and filled by
    :func:`sample_bilinear` on the source, so nodata propagates strictly.
    """
    if src.crs != geomath.WGS84:
        raise ValueError(f"expected an EPSG:4326 grid, got EPSG:{src.crs}")
    bb = src.bbox
    if max(abs(bb.south), abs(bb.north)) > geomath.MAX_LATITUDE:
        raise OutOfDomainError("raster extends beyond the Web Mercator latitude band")
    height, width, res = mercator_grid_shape(src, target_res)
    mb = geomath.bbox_to_mercator(bb)

    xs = mb.west + (np.arange(width) + 0.5) * res
    ys = mb.north - (np.arange(height) + 0.5) * res
    gx, gy = np.meshgrid(xs, ys)
    lon, lat = geomath.mercator_inverse(gx, gy)
    values = sample_bilinear(src, lon, lat)
    if not np.any(np.isfinite(values)):
        raise EmptyRasterError("reprojected raster has no valid pixels")
    nodata = src.nodata if src.nodata is not None and not math.isnan(src.nodata) else DEFAULT_ASCII_NODATA
    values = np.where(np.isfinite(values), values, nodata)
    return DemGrid(
        crs=geomath.WEB_MERCATOR,
        origin_x=mb.west,
        origin_y=mb.north,
        pixel_w=res,
        pixel_h=res,
        values=values,
        nodata=nodata,
    )
