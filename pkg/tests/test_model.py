from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoqa.model import (
    EARTH_RADIUS_M,
    LatLng,
    Place,
    Provider,
    RouteResult,
    RouteStep,
    haversine_distance,
    validate_place,
    validate_route,
)

# Independent-oracle values, computed with 50-digit spherical law of
# cosines before the implementation existed.
PARIS = LatLng(48.8584, 2.2945)
LONDON = LatLng(51.5007, -0.1246)
PARIS_LONDON_M = 340538.920072
ANTIPODAL_M = 20015086.796

coords = st.builds(
    LatLng,
    st.floats(min_value=-90, max_value=90, allow_nan=False),
    st.floats(min_value=-180, max_value=180, allow_nan=False),
)


def make_place(**overrides) -> Place:
    kwargs = dict(
        id="p1",
        display_name="Louvre Museum",
        short_address="Rue de Rivoli, Paris",
        location=LatLng(48.8606, 2.3376),
        provider=Provider.GOOGLE,
    )
    kwargs.update(overrides)
    return Place(**kwargs)


class TestLatLng:
    def test_bounds_enforced_at_construction(self):
        with pytest.raises(ValueError):
            LatLng(90.0001, 0)
        with pytest.raises(ValueError):
            LatLng(0, -180.0001)
        assert LatLng(90, 180).latitude == 90

    def test_values_are_immutable(self):
        point = LatLng(1.0, 2.0)
        with pytest.raises(AttributeError):
            point.latitude = 3.0


class TestHaversine:
    def test_identity_is_zero(self):
        assert haversine_distance(PARIS, PARIS) == 0.0

    def test_antipodal_half_circumference(self):
        d = haversine_distance(LatLng(0, 0), LatLng(0, 180))
        assert d == pytest.approx(math.pi * EARTH_RADIUS_M, abs=1.0)
        assert d == pytest.approx(ANTIPODAL_M, abs=1.0)

    def test_paris_to_london_matches_independent_oracle(self):
        d = haversine_distance(PARIS, LONDON)
        assert d == pytest.approx(PARIS_LONDON_M, rel=1e-3)

    @given(coords, coords)
    def test_symmetric(self, a, b):
        assert haversine_distance(a, b) == pytest.approx(haversine_distance(b, a), abs=1e-9)

    @given(coords, coords)
    def test_non_negative_and_zero_iff_equal(self, a, b):
        d = haversine_distance(a, b)
        assert d >= 0.0
        if a == b:
            assert d == 0.0

    @settings(max_examples=200)
    @given(coords, coords, coords)
    def test_triangle_inequality(self, a, b, c):
        ab = haversine_distance(a, b)
        bc = haversine_distance(b, c)
        ac = haversine_distance(a, c)
        assert ac <= ab + bc + 1e-6 * max(ac, 1.0)


class TestValidatePlace:
    def test_valid_place_reports_nothing(self):
        assert validate_place(make_place(rating=4.2)) == []

    def test_empty_id(self):
        assert any("id empty" in v for v in validate_place(make_place(id="")))

    def test_rating_out_of_range(self):
        violations = validate_place(make_place(rating=7.0))
        assert any("rating out of [0,5]" in v for v in violations)

    def test_multiple_violations_all_reported(self):
        violations = validate_place(make_place(id="", display_name="", rating=-1.0))
        assert len(violations) == 3


class TestValidateRoute:
    def make_route(self, **overrides) -> RouteResult:
        kwargs = dict(
            origin=PARIS,
            destination=LONDON,
            travel_mode="DRIVE",
            distance_meters=1000,
            duration_seconds=120,
            encoded_polyline="_p~iF~ps|U_ulLnnqC",
            provider=Provider.GOOGLE,
            steps=(RouteStep("Head north", 400),),
        )
        kwargs.update(overrides)
        return RouteResult(**kwargs)

    def test_valid_route(self):
        assert validate_route(self.make_route()) == []

    def test_transit_is_excluded(self):
        violations = validate_route(self.make_route(travel_mode="TRANSIT"))
        assert any("TRANSIT" in v for v in violations)

    def test_step_longer_than_total(self):
        violations = validate_route(self.make_route(steps=(RouteStep("x", 5000),)))
        assert any("exceeds total" in v for v in violations)

    def test_undecodable_polyline(self):
        violations = validate_route(self.make_route(encoded_polyline="_p~iF~"))
        assert any("does not decode" in v for v in violations)
