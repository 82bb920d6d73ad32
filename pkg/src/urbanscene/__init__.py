"""Generate 3D urban scene models (terrain, roads, power lines, buildings)
from open geodata and serialize them as figure JSON."""

from .drape import Path3D, Polyline, densify_polyline, drape_polylines
from .extrude import Building, extrude_building, footprint_base_elevation, triangulate_ring
from .geomath import BBox, Ring, mercator_forward, mercator_inverse, point_in_ring, ring_metrics
from .raster import DemGrid, parse_ascii_grid, parse_geotiff, reproject_to_mercator, sample_bilinear
from .scene import FigureDoc, assemble_figure, serialize_figure
from .terrain import TriMesh, build_terrain_mesh

__version__ = "0.1.0"

__all__ = [
    "BBox", "Building", "DemGrid", "FigureDoc", "Path3D", "Polyline", "Ring", "TriMesh",
    "assemble_figure", "build_terrain_mesh", "densify_polyline", "drape_polylines",
    "extrude_building", "footprint_base_elevation", "mercator_forward", "mercator_inverse",
    "parse_ascii_grid", "parse_geotiff", "point_in_ring", "reproject_to_mercator",
    "ring_metrics", "sample_bilinear", "serialize_figure", "triangulate_ring",
]
