"""
Draping roads and power lines
=============================

OSM ways are densified to a fixed spacing and every sample takes its
height from the DEM, plus a small offset so lines do not vanish into the
terrain surface.
"""

# %%
from pathlib import Path

import numpy as np

from urbanscene.drape import Polyline, densify_polyline, drape_polylines
from urbanscene.raster import load_dem, reproject_to_mercator
from urbanscene.sources import load_ways

DATA = Path(__file__).resolve().parents[1] / "tests" / "data" / "alna"
grid = reproject_to_mercator(load_dem(DATA / "dem.tif"))

# %%
# Densification keeps the original vertices and splits each edge into
# equal parts no longer than the spacing.
line = Polyline([(0.0, 0.0), (25.0, 0.0), (25.0, 10.0)])
print(densify_polyline(line, 10.0).coords)

# %%
roads = [Polyline(w.mercator(), "road", {"id": w.id}) for w in load_ways(DATA / "roads.json", "road")]
power = [Polyline(w.mercator(), "power", {"id": w.id}) for w in load_ways(DATA / "power.json", "power")]

road_path = drape_polylines(roads, grid, spacing=10.0, z_offset=1.0)
power_path = drape_polylines(power, grid, spacing=10.0, z_offset=2.0)
print(len(road_path), "road segments,", road_path.n_points, "points")
print(len(power_path), "power segments,", power_path.n_points, "points")

# %%
# Halving the spacing roughly doubles the sample count.
finer = drape_polylines(roads, grid, spacing=5.0, z_offset=1.0)
print("5 m spacing:", finer.n_points, "points")

# Height profile of the first road:
seg = road_path.segments[0]
dist = np.concatenate([[0], np.cumsum(np.hypot(*np.diff(seg[:, :2], axis=0).T))])
for d, z in list(zip(dist, seg[:, 2]))[::10]:
    print("%7.1f m  %6.2f m" % (d, z))
