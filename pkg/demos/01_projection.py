"""
Web Mercator in a few lines
===========================

Every layer of a scene is brought into EPSG:3857 (spherical Web Mercator,
meters) before meshing. This script shows the forward and inverse
transforms and the polygon helpers that operate on projected rings.
"""

# %%
import numpy as np

from urbanscene import geomath

# The antimeridian on the equator sits at pi * R meters east of the origin.
print(geomath.mercator_forward(180.0, 0.0))

# %%
# Arrays work too. Here is a transect from Oslo towards the north.
lat = np.linspace(59.90, 59.95, 6)
x, y = geomath.mercator_forward(np.full_like(lat, 10.85), lat)
print(np.round(y - y[0], 2))  # meters north of the first sample

# Round trip back to degrees:
lon_back, lat_back = geomath.mercator_inverse(x, y)
print("max latitude error:", np.max(np.abs(lat_back - lat)))

# %%
# Mercator inflates distances by 1 / cos(latitude). At 60 deg north a
# 100 m ground distance spans about 200 projected meters.
x0, y0 = geomath.mercator_forward(10.0, 60.0)
# one degree of longitude is 111.32 km at the equator, half that at 60N
dlon = 100 / (111319.49 * np.cos(np.radians(60.0)))
x1, _ = geomath.mercator_forward(10.0 + dlon, 60.0)
print("projected width of 100 m at 60N:", round(x1 - x0, 1))

# %%
# Footprints are rings. Metrics give signed area (positive = CCW) and the
# area-weighted centroid.
ring = geomath.Ring([(0, 0), (20, 0), (20, 10), (10, 10), (10, 20), (0, 20)])
m = geomath.ring_metrics(ring)
print(m.signed_area, m.centroid, m.is_ccw)
print("inside the notch?", geomath.point_in_ring(15, 15, ring))
print("simple?", geomath.is_simple(ring))
