"""
From GeoTIFF to terrain mesh
============================

Read a small Copernicus-style DEM tile, move it to Web Mercator with
bilinear resampling and triangulate it, one vertex per valid pixel.
"""

# %%
from pathlib import Path

import numpy as np

from urbanscene.raster import load_dem, reproject_to_mercator, sample_bilinear
from urbanscene.terrain import build_terrain_mesh

DATA = Path(__file__).resolve().parents[1] / "tests" / "data" / "alna"

dem = load_dem(DATA / "dem.tif")
print("source grid:", dem.values.shape, "EPSG:%d" % dem.crs)
print("nodata pixels:", int((~dem.valid_mask).sum()))

# %%
# Bilinear sampling in the grid's own CRS. Pixel centers return their
# stored value, and anything touching nodata comes back as NaN.
xs, ys = dem.pixel_centers()
print(sample_bilinear(dem, xs[10, 10], ys[10, 10]), dem.values[10, 10])
print(sample_bilinear(dem, xs[1, 68], ys[1, 68]))

# %%
# "auto" picks a square Mercator pixel equal to one source row at the
# tile's mid latitude, stretched by 1 / cos(lat).
merc = reproject_to_mercator(dem)
print("mercator grid:", merc.values.shape, "pixel size %.2f m" % merc.pixel_w)

# %%
mesh = build_terrain_mesh(merc)
print(mesh.n_vertices, "vertices,", mesh.n_triangles, "triangles")
print("elevation range: %.1f .. %.1f m" % (mesh.zs.min(), mesh.zs.max()))

# Every triangle faces up:
p = mesh.vertices()[mesh.tris]
normals = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
print("all normals point up:", bool(np.all(normals[:, 2] > 0)))
