import math
import random
from pathlib import Path

import pytest
import yaml
from shapely.geometry import Point as ShapelyPoint
from shapely.geometry import Polygon as ShapelyPolygon

from scenloop.roads import (DanglingLaneReference, ManeuverType, SchemaError,
                            classify_turn, load_network, load_network_data)
from scenloop.roads import geometry as g

MAPS = Path(__file__).parents[1] / "src" / "scenloop" / "data" / "maps"


@pytest.fixture(scope="module")
def cross4():
    return load_network(MAPS / "town_cross4.map")


@pytest.fixture(scope="module")
def tee3():
    return load_network(MAPS / "town_tee3.map")


@pytest.fixture(scope="module")
def straight():
    return load_network(MAPS / "town_straight.map")


def test_cross4_is_4way(cross4):
    (intersection,) = cross4.intersection_list()
    assert intersection.is4Way and not intersection.is3Way
    assert len(intersection.incoming_lanes) == 4


def test_tee3_is_3way_with_six_maneuvers(tee3):
    (intersection,) = tee3.intersection_list()
    assert intersection.is3Way and not intersection.is4Way
    assert len(tee3.maneuvers) == 6


def test_tee3_stem_has_left_and_right_only(tee3):
    stem = tee3.maneuvers_of("S_in")
    assert [m.type for m in stem] == [ManeuverType.RIGHT_TURN, ManeuverType.LEFT_TURN]


def test_each_cross4_incoming_lane_has_one_maneuver_per_type(cross4):
    for lane_id in cross4.intersection_list()[0].incoming_lanes:
        maneuvers = cross4.maneuvers_of(lane_id)
        assert sorted(m.type.value for m in maneuvers) == [
            "LEFT_TURN", "RIGHT_TURN", "STRAIGHT"]


def test_lane_without_intersection_has_no_maneuvers(straight):
    assert straight.maneuvers_of("fast") == []


def test_dangling_lane_reference():
    doc = {
        "format_version": 1,
        "name": "bad",
        "lanes": [
            {"id": "L0", "width": 3.5, "centerline": [[0, 0], [10, 0]]},
            {"id": "L1", "width": 3.5, "centerline": [[10, 0], [20, 0]]},
        ],
        "intersections": [
            {"id": "I0", "region": [[0, 0], [1, 0], [1, 1]],
             "maneuvers": [{"start": "L0", "connecting": "L9", "end": "L1"}]},
        ],
    }
    with pytest.raises(DanglingLaneReference) as exc:
        load_network_data(doc)
    assert "L9" in str(exc.value)


def test_schema_errors():
    with pytest.raises(SchemaError):
        load_network_data({"name": "x"})  # missing format_version
    with pytest.raises(SchemaError):
        load_network_data({"format_version": 1, "name": "x",
                           "lanes": [{"id": "a", "width": 3.5, "centerline": [[0, 0]]}]})


def test_degenerate_centerline():
    from scenloop.roads import DegenerateCenterline
    doc = {"format_version": 1, "name": "x",
           "lanes": [{"id": "a", "width": 3.5, "centerline": [[0, 0], [0, 0]]}]}
    with pytest.raises(DegenerateCenterline):
        load_network_data(doc)


def test_right_turn_conflicts_include_lateral_straight(cross4):
    (right,) = [m for m in cross4.maneuvers_of("S_in") if m.type is ManeuverType.RIGHT_TURN]
    conflicts = cross4.conflicting_maneuvers(right)
    straights = [m for m in conflicts if m.type is ManeuverType.STRAIGHT]
    # the lateral arm whose straight path crosses/merges into the exit lane
    assert [m.start_lane for m in straights] == ["W_in"]


def test_opposite_right_turns_do_not_conflict(cross4):
    (s_right,) = [m for m in cross4.maneuvers_of("S_in") if m.type is ManeuverType.RIGHT_TURN]
    (n_right,) = [m for m in cross4.maneuvers_of("N_in") if m.type is ManeuverType.RIGHT_TURN]
    assert n_right.id not in [c.id for c in cross4.conflicting_maneuvers(s_right)]
    assert s_right.id not in [c.id for c in cross4.conflicting_maneuvers(n_right)]


def test_maneuver_never_conflicts_with_itself_or_same_start(cross4, tee3):
    for net in (cross4, tee3):
        for m in net.maneuver_list():
            for c in net.conflicting_maneuvers(m):
                assert c.start_lane != m.start_lane


def test_conflict_symmetry(cross4, tee3):
    for net in (cross4, tee3):
        maneuvers = net.maneuver_list()
        for m1 in maneuvers:
            for m2 in maneuvers:
                a = m2.id in [c.id for c in net.conflicting_maneuvers(m1)]
                b = m1.id in [c.id for c in net.conflicting_maneuvers(m2)]
                assert a == b, (m1.id, m2.id)


def _swept_polygon(net, maneuver, step=0.25):
    lane = net.lanes[maneuver.connecting_lane]
    pts = g.sample_polyline(list(lane.centerline), step)
    half = lane.width / 2.0
    left, right = [], []
    for i, p in enumerate(pts):
        h = g.vertex_heading(pts, i if i > 0 else 1) if len(pts) > 1 else 0.0
        nx, ny = -math.sin(h) * half, math.cos(h) * half
        left.append((p[0] + nx, p[1] + ny))
        right.append((p[0] - nx, p[1] - ny))
    return ShapelyPolygon(left + right[::-1])


def test_conflicts_match_swept_area_oracle(cross4):
    # independent oracle: build the buffered swept ribbons as polygons and
    # intersect them with a mature geometry library
    net = cross4
    polys = {m.id: _swept_polygon(net, m) for m in net.maneuver_list()}
    for m in net.maneuver_list():
        mine = [c.id for c in net.conflicting_maneuvers(m)]
        for other in net.maneuvers_at(m.intersection):
            if other.start_lane == m.start_lane:
                continue
            overlap = polys[m.id].intersection(polys[other.id]).area
            # 1 mm^2: tangency noise must not count as an overlap
            assert (overlap > 1e-3) == (other.id in mine), (m.id, other.id, overlap)


def test_point_in_region_matches_shapely_oracle(cross4):
    region = cross4.drivable_region
    shapely_rings = [ShapelyPolygon(ring) for ring in region.polygons]
    rng = random.Random(7)
    for _ in range(1000):
        p = (rng.uniform(-120, 120), rng.uniform(-120, 120))
        oracle = any(r.contains(ShapelyPoint(p)) for r in shapely_rings)
        assert region.contains(p) == oracle


def test_lane_centroid_inside_drivable_and_far_point_outside(cross4):
    lane = cross4.lanes["S_in"]
    a, b = lane.centerline[0], lane.centerline[-1]
    mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    assert cross4.drivable_region.contains(mid)
    far = (500.0, 500.0)
    assert not cross4.drivable_region.contains(far)
    assert cross4.drivable_region.distance_to(far) > 100


def test_distance_to_region_zero_inside(cross4):
    assert cross4.drivable_region.distance_to((2.25, -50.0)) == 0.0
    assert cross4.intersections["I0"].ring == ((-4.5, -4.5), (4.5, -4.5),
                                               (4.5, 4.5), (-4.5, 4.5))


def test_rotation_preserves_maneuver_types(cross4):
    base = yaml.safe_load((MAPS / "town_cross4.map").read_text())
    original = load_network_data(base).maneuvers
    for angle_deg in (17.0, 45.0, 133.5, 270.0):
        theta = math.radians(angle_deg)
        c, s = math.cos(theta), math.sin(theta)

        def rot(p):
            return [p[0] * c - p[1] * s, p[0] * s + p[1] * c]

        doc = yaml.safe_load((MAPS / "town_cross4.map").read_text())
        for lane in doc["lanes"]:
            lane["centerline"] = [rot(p) for p in lane["centerline"]]
        for inter in doc["intersections"]:
            inter["region"] = [rot(p) for p in inter["region"]]
        rotated = load_network_data(doc).maneuvers
        assert {k: m.type for k, m in rotated.items()} == {
            k: m.type for k, m in original.items()}


def test_classify_turn_thresholds():
    assert classify_turn(0.0, math.radians(29.0)) is ManeuverType.STRAIGHT
    assert classify_turn(0.0, math.radians(31.0)) is ManeuverType.LEFT_TURN
    assert classify_turn(0.0, math.radians(-31.0)) is ManeuverType.RIGHT_TURN
    # wrap-around: heading 170 deg to -170 deg is a 20 deg left drift
    assert classify_turn(math.radians(170), math.radians(-170)) is ManeuverType.STRAIGHT


def test_successor_links_derived_from_maneuvers(cross4):
    s_in = cross4.lanes["S_in"]
    assert "c_S_E" in s_in.successors and "c_S_N" in s_in.successors
    conn = cross4.lanes["c_S_E"]
    assert conn.predecessors == ("S_in",)
    assert conn.successors == ("E_out",)
