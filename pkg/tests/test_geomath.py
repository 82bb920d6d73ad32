import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import distance_to_boundary, star_polygon, two_opt_polygon, winding_number
from urbanscene import geomath
from urbanscene.errors import DegenerateGeometryError, OutOfDomainError
from urbanscene.geomath import BBox, Ring, mercator_forward, mercator_inverse, point_in_ring, ring_metrics

# mpmath, 40 digits: pi * 6378137
HALF_WORLD = 20037508.342789244
# mpmath, 40 digits: forward projection of (10.8, 59.93)
OSLO_X = 1202250.5005673546
OSLO_Y = 8384169.623431632

lons = st.floats(-180, 180, allow_nan=False)
lats = st.floats(-85, 85, allow_nan=False)


def test_origin_maps_to_origin():
    assert mercator_forward(0.0, 0.0) == (0.0, 0.0)
    assert mercator_inverse(0.0, 0.0) == (0.0, 0.0)


def test_antimeridian_is_pi_r():
    x, y = mercator_forward(180.0, 0.0)
    assert x == pytest.approx(HALF_WORLD, abs=1e-6)
    assert y == 0.0


def test_inverse_of_half_world():
    lon, lat = mercator_inverse(HALF_WORLD, 0.0)
    assert lon == pytest.approx(180.0, abs=1e-12)
    assert lat == 0.0


def test_oslo_against_extended_precision():
    x, y = mercator_forward(10.8, 59.93)
    assert x == pytest.approx(OSLO_X, abs=1e-6)
    assert y == pytest.approx(OSLO_Y, abs=1e-6)


@pytest.mark.parametrize("lat", [85.07, -85.07, 90.0])
def test_latitude_outside_band_rejected(lat):
    with pytest.raises(OutOfDomainError):
        mercator_forward(0.0, lat)


def test_inverse_rejects_out_of_world():
    with pytest.raises(OutOfDomainError):
        mercator_inverse(HALF_WORLD * 1.001, 0.0)


def test_vectorized_forward_matches_scalar():
    lon = np.array([-170.0, 0.0, 10.8])
    lat = np.array([-60.0, 0.0, 59.93])
    xs, ys = mercator_forward(lon, lat)
    for a, b, x, y in zip(lon, lat, xs, ys):
        assert (x, y) == mercator_forward(float(a), float(b))


@given(lons, lats)
def test_round_trip(lon, lat):
    back_lon, back_lat = mercator_inverse(*mercator_forward(lon, lat))
    assert abs(back_lon - lon) <= 1e-9
    assert abs(back_lat - lat) <= 1e-9


@given(lons, lons, lats)
def test_forward_monotone(lon_a, lon_b, lat):
    if lon_b - lon_a > 1e-9:
        assert mercator_forward(lon_a, lat)[0] < mercator_forward(lon_b, lat)[0]


@given(lats, lats)
def test_forward_monotone_in_latitude(lat_a, lat_b):
    if lat_b - lat_a > 1e-9:
        assert mercator_forward(0.0, lat_a)[1] < mercator_forward(0.0, lat_b)[1]


UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_unit_square_metrics():
    m = ring_metrics(UNIT_SQUARE)
    assert m.signed_area == 1.0
    assert m.centroid == (0.5, 0.5)
    assert m.is_ccw


def test_reversed_square_is_clockwise():
    m = ring_metrics(UNIT_SQUARE[::-1])
    assert m.signed_area == -1.0
    assert not m.is_ccw


def test_triangle_metrics_hand_computed():
    # shoelace: (0*0-4*0 + 4*3-0*0 + 0*0-0*3)/2 = 6; centroid = vertex mean for triangles
    m = ring_metrics([(0, 0), (4, 0), (0, 3)])
    assert m.signed_area == pytest.approx(6.0)
    assert m.centroid == pytest.approx((4 / 3, 1.0))


def test_closing_vertex_is_dropped():
    assert len(Ring(UNIT_SQUARE + [UNIT_SQUARE[0]])) == 4


def test_zero_area_ring_rejected():
    with pytest.raises(DegenerateGeometryError):
        ring_metrics([(0, 0), (1, 1), (2, 2)])


def test_too_few_vertices_rejected():
    with pytest.raises(DegenerateGeometryError):
        Ring([(0, 0), (1, 1)])


def test_area_invariant_under_rotation_and_negated_by_reversal(rng):
    for _ in range(20):
        poly = star_polygon(rng, int(rng.integers(3, 15)))
        area = ring_metrics(poly).signed_area
        for shift in range(len(poly)):
            assert ring_metrics(np.roll(poly, shift, axis=0)).signed_area == pytest.approx(area, rel=1e-12)
        assert ring_metrics(poly[::-1]).signed_area == pytest.approx(-area, rel=1e-12)


def test_centroid_stable_for_mercator_scale_coordinates():
    square = np.array(UNIT_SQUARE, float) * 20 + [1.2e6, 8.38e6]
    assert ring_metrics(square).centroid == pytest.approx((1.2e6 + 10, 8.38e6 + 10), abs=1e-6)


def test_point_in_unit_square():
    assert point_in_ring(0.5, 0.5, UNIT_SQUARE)
    assert not point_in_ring(2, 2, UNIT_SQUARE)


def test_point_in_ring_matches_winding_number(rng):
    for n in range(100):
        poly = star_polygon(rng, int(rng.integers(3, 13))) if n % 2 else two_opt_polygon(rng, int(rng.integers(3, 13)))
        pts = rng.uniform(-11, 11, (50, 2))
        got = point_in_ring(pts[:, 0], pts[:, 1], poly)
        for (px, py), inside in zip(pts, got):
            if distance_to_boundary(px, py, poly) < 1e-9:
                continue
            assert bool(inside) == (winding_number(px, py, poly) != 0)


def test_is_simple():
    assert geomath.is_simple(UNIT_SQUARE)
    bowtie = [(0, 0), (1, 1), (1, 0), (0, 1)]
    assert not geomath.is_simple(bowtie)
    touching = [(0, 0), (4, 0), (4, 4), (2, 0.0), (0, 4)]
    assert not geomath.is_simple(touching)


def test_bbox_validation():
    assert BBox(0, 0, 1, 1).validate()
    with pytest.raises(DegenerateGeometryError):
        BBox(1, 0, 1, 1).validate()


def test_bbox_round_trip_through_mercator():
    bb = BBox(10.84, 59.92, 10.87, 59.935)
    back = geomath.bbox_to_geo(geomath.bbox_to_mercator(bb))
    assert all(math.isclose(a, b, abs_tol=1e-9) for a, b in zip(back, bb))
