"""Minimal reader for single-band GeoTIFF elevation rasters.

Supported subset: classic (non-Big) TIFF in either byte order, strip or
tile layout, int16/uint16/float32 samples, no compression or Deflate,
predictors 1-3, georeferencing via ModelPixelScale + ModelTiepoint, and
the GDAL_NODATA ASCII tag. Anything else raises
:class:`UnsupportedFeatureError` naming the feature.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedFeatureError

IMAGE_WIDTH = 256
IMAGE_LENGTH = 257
BITS_PER_SAMPLE = 258
COMPRESSION = 259
STRIP_OFFSETS = 273
SAMPLES_PER_PIXEL = 277
ROWS_PER_STRIP = 278
STRIP_BYTE_COUNTS = 279
PLANAR_CONFIG = 284
PREDICTOR = 317
TILE_WIDTH = 322
TILE_LENGTH = 323
TILE_OFFSETS = 324
TILE_BYTE_COUNTS = 325
SAMPLE_FORMAT = 339
MODEL_PIXEL_SCALE = 33550
MODEL_TIEPOINT = 33922
MODEL_TRANSFORMATION = 34264
GEO_KEY_DIRECTORY = 34735
GDAL_NODATA = 42113

GT_RASTER_TYPE = 1025
PROJECTED_CS_TYPE = 3072
RASTER_PIXEL_IS_POINT = 2

COMPRESSION_NAMES = {
    2: "CCITT RLE", 3: "CCITT Group 3", 4: "CCITT Group 4", 5: "LZW", 6: "old-style JPEG",
    7: "JPEG", 32773: "PackBits", 34887: "LERC", 34925: "LZMA", 50000: "ZSTD", 50001: "WebP",
}
_DEFLATE = (8, 32946)

# (type code) -> (struct char, size)
_FIELD_TYPES = {
    1: ("B", 1), 2: ("c", 1), 3: ("H", 2), 4: ("I", 4), 5: ("II", 8), 6: ("b", 1),
    7: ("B", 1), 8: ("h", 2), 9: ("i", 4), 10: ("ii", 8), 11: ("f", 4), 12: ("d", 8),
}

_SAMPLE_DTYPES = {(1, 16): "u2", (2, 16): "i2", (3, 32): "f4"}
_SAMPLE_FORMAT_NAMES = {1: "uint", 2: "int", 3: "float"}


@dataclass
class GeoTiffImage:
    values: np.ndarray
    origin_x: float
    origin_y: float
    pixel_w: float
    pixel_h: float
    nodata: float | None


class _Reader:
    def __init__(self, data: bytes, order: str):
        self.data = data
        self.order = order

    def unpack(self, fmt: str, offset: int):
        size = struct.calcsize(self.order + fmt)
        if offset < 0 or offset + size > len(self.data):
            raise ParseError(f"truncated TIFF: need {size} bytes at offset {offset}")
        return struct.unpack_from(self.order + fmt, self.data, offset)

    def chunk(self, offset: int, count: int) -> bytes:
        if offset < 0 or count < 0 or offset + count > len(self.data):
            raise ParseError(f"truncated TIFF: block at {offset}+{count} exceeds {len(self.data)} bytes")
        return self.data[offset:offset + count]


def _read_ifd(rd: _Reader, offset: int) -> dict[int, tuple]:
    (count,) = rd.unpack("H", offset)
    tags = {}
    for n in range(count):
        entry = offset + 2 + 12 * n
        tag, ftype, nvals = rd.unpack("HHI", entry)
        if ftype not in _FIELD_TYPES:
            continue
        char, size = _FIELD_TYPES[ftype]
        total = size * nvals
        pos = entry + 8 if total <= 4 else rd.unpack("I", entry + 8)[0]
        if ftype == 2:
            raw = rd.chunk(pos, nvals)
            tags[tag] = (raw.split(b"\x00", 1)[0].decode("ascii", "replace"),)
            continue
        values = rd.unpack(char * nvals, pos) if nvals else ()
        if ftype in (5, 10):
            values = tuple(values[i] / values[i + 1] for i in range(0, len(values), 2))
        tags[tag] = values
    return tags


def _undo_predictor(block: np.ndarray, predictor: int, dtype: np.dtype) -> np.ndarray:
    """Decode one block of rows, shaped (rows, width) of raw bytes."""
    rows, nbytes = block.shape
    width = nbytes // dtype.itemsize
    if predictor == 1:
        return block.view(dtype).reshape(rows, width)
    if predictor == 2:
        if dtype.kind == "f":
            raise UnsupportedFeatureError("horizontal predictor on float samples")
        vals = block.view(dtype).reshape(rows, width)
        return np.cumsum(vals, axis=1, dtype=dtype)
    if predictor == 3:
        if dtype.kind != "f":
            raise UnsupportedFeatureError("floating-point predictor on integer samples")
        acc = np.cumsum(block, axis=1, dtype=np.uint8)
        # byte planes are stored most-significant first
        planes = acc.reshape(rows, dtype.itemsize, width).transpose(0, 2, 1)
        return np.ascontiguousarray(planes).view(dtype.newbyteorder(">")).reshape(rows, width)
    raise UnsupportedFeatureError(f"predictor {predictor}")


def _decompress(raw: bytes, compression: int) -> bytes:
    if compression == 1:
        return raw
    try:
        return zlib.decompress(raw)
    except zlib.error as exc:
        raise ParseError(f"corrupt Deflate block: {exc}") from None


def read_geotiff(data: bytes) -> GeoTiffImage:
    """Decode the first image of a GeoTIFF byte stream."""
    if len(data) < 8:
        raise ParseError("truncated TIFF header")
    if data[:2] == b"II":
        order = "<"
    elif data[:2] == b"MM":
        order = ">"
    else:
        raise ParseError("not a TIFF stream (bad byte-order mark)")
    rd = _Reader(data, order)
    (magic,) = rd.unpack("H", 2)
    if magic == 43:
        raise UnsupportedFeatureError("BigTIFF")
    if magic != 42:
        raise ParseError(f"not a TIFF stream (magic {magic})")
    (ifd_offset,) = rd.unpack("I", 4)
    tags = _read_ifd(rd, ifd_offset)

    def tag1(code, default=None):
        if code in tags:
            return tags[code][0]
        if default is None:
            raise ParseError(f"missing required TIFF tag {code}")
        return default

    width = int(tag1(IMAGE_WIDTH))
    height = int(tag1(IMAGE_LENGTH))
    spp = int(tag1(SAMPLES_PER_PIXEL, 1))
    if spp != 1:
        raise UnsupportedFeatureError(f"multi-band raster ({spp} samples per pixel)")
    compression = int(tag1(COMPRESSION, 1))
    if compression != 1 and compression not in _DEFLATE:
        name = COMPRESSION_NAMES.get(compression, "unknown")
        raise UnsupportedFeatureError(f"{name} compression (code {compression})")
    bits = int(tag1(BITS_PER_SAMPLE, 1))
    sample_format = int(tag1(SAMPLE_FORMAT, 1))
    if (sample_format, bits) not in _SAMPLE_DTYPES:
        kind = _SAMPLE_FORMAT_NAMES.get(sample_format, f"format {sample_format}")
        raise UnsupportedFeatureError(f"sample type {kind}{bits}")
    dtype = np.dtype(order + _SAMPLE_DTYPES[sample_format, bits])
    predictor = int(tag1(PREDICTOR, 1))

    if TILE_WIDTH in tags:
        tw, th = int(tag1(TILE_WIDTH)), int(tag1(TILE_LENGTH))
        offsets, counts = tags.get(TILE_OFFSETS), tags.get(TILE_BYTE_COUNTS)
    else:
        tw, th = width, min(int(tag1(ROWS_PER_STRIP, height)), height)
        offsets, counts = tags.get(STRIP_OFFSETS), tags.get(STRIP_BYTE_COUNTS)
    if not offsets or not counts or len(offsets) != len(counts):
        raise ParseError("missing or inconsistent strip/tile offsets")
    across = -(-width // tw)
    down = -(-height // th)
    if len(offsets) < across * down:
        raise ParseError(f"expected {across * down} data blocks, found {len(offsets)}")

    out = np.empty((down * th, across * tw), dtype=dtype.newbyteorder("="))
    for idx in range(across * down):
        raw = _decompress(rd.chunk(offsets[idx], counts[idx]), compression)
        row_bytes = tw * dtype.itemsize
        rows = th
        if TILE_WIDTH not in tags and idx == down - 1:
            rows = height - idx * th
        if len(raw) < rows * row_bytes:
            raise ParseError(f"truncated TIFF: data block {idx} holds {len(raw)} of {rows * row_bytes} bytes")
        block = np.frombuffer(raw[:rows * row_bytes], dtype=np.uint8).reshape(rows, row_bytes)
        decoded = _undo_predictor(block.copy(), predictor, dtype)
        r, c = divmod(idx, across)
        out[r * th:r * th + rows, c * tw:(c + 1) * tw] = decoded
    values = out[:height, :width].astype(float)

    if MODEL_PIXEL_SCALE not in tags or MODEL_TIEPOINT not in tags:
        raise ParseError("missing georeferencing (ModelPixelScale/ModelTiepoint)")
    sx, sy = tags[MODEL_PIXEL_SCALE][:2]
    ti, tj, _, tx, ty, _ = tags[MODEL_TIEPOINT][:6]
    if not (sx > 0 and sy > 0):
        raise ParseError("non-positive ModelPixelScale")
    origin_x = tx - ti * sx
    origin_y = ty + tj * sy

    geokeys = _geokeys(tags.get(GEO_KEY_DIRECTORY, ()))
    if PROJECTED_CS_TYPE in geokeys:
        raise UnsupportedFeatureError(f"projected CRS (EPSG:{geokeys[PROJECTED_CS_TYPE]})")
    if geokeys.get(GT_RASTER_TYPE) == RASTER_PIXEL_IS_POINT:
        origin_x -= sx / 2.0
        origin_y += sy / 2.0

    nodata = None
    if GDAL_NODATA in tags:
        text = tags[GDAL_NODATA][0].strip()
        try:
            nodata = float(text)
        except ValueError:
            raise ParseError(f"bad GDAL_NODATA value {text!r}") from None

    return GeoTiffImage(values, float(origin_x), float(origin_y), float(sx), float(sy), nodata)


def _geokeys(directory) -> dict[int, int]:
    """Short-valued keys of a GeoKeyDirectory (values stored inline only)."""
    if len(directory) < 4:
        return {}
    keys = {}
    for n in range(directory[3]):
        key, location, _, value = directory[4 + 4 * n:8 + 4 * n]
        if location == 0:
            keys[key] = value
    return keys
