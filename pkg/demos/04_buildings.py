"""
Extruding buildings
===================

Footprints become closed prisms: an ear-clipped base and roof plus two
triangles per wall. Heights come from a polygon height layer matched by
centroid containment, with an 8 m fallback.
"""

# %%
from pathlib import Path

from urbanscene import geomath
from urbanscene.extrude import Building, extrude_building, footprint_base_elevation, triangulate_ring
from urbanscene.raster import load_dem, reproject_to_mercator
from urbanscene.sources import FileHeightProvider, assign_heights, load_ways

DATA = Path(__file__).resolve().parents[1] / "tests" / "data" / "alna"

# %%
# An L-shaped footprint needs ear clipping rather than a simple fan.
ell = geomath.Ring([(0, 0), (30, 0), (30, 10), (10, 10), (10, 25), (0, 25)])
print(triangulate_ring(ell))

prism = extrude_building(Building(ell, height=12.0, base_z=100.0))
print(prism.n_vertices, "vertices,", prism.n_triangles, "triangles")

# %%
grid = reproject_to_mercator(load_dem(DATA / "dem.tif"))
ways = load_ways(DATA / "buildings.json", "building")
rings = [geomath.ensure_ccw(geomath.Ring(w.mercator())) for w in ways]
heights = FileHeightProvider(DATA / "heights.geojson").features()

for w, b in zip(ways, assign_heights(rings, heights, default_h=8.0, way_ids=[w.id for w in ways])):
    base = footprint_base_elevation(b.footprint, grid)
    print("way %d: %5.1f m (%s), base at %.2f m" % (w.id, b.height, b.height_source, base))
