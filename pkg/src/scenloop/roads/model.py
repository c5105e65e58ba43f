"""Road network model: lanes, intersections, maneuvers, regions, queries.

Networks are immutable after loading; every query returns results in stable
id order so downstream sampling is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import geometry as g


class ManeuverType(Enum):
    LEFT_TURN = "LEFT_TURN"
    RIGHT_TURN = "RIGHT_TURN"
    STRAIGHT = "STRAIGHT"


@dataclass(frozen=True)
class Lane:
    id: str
    centerline: tuple[g.Point, ...]
    width: float
    successors: tuple[str, ...] = ()
    predecessors: tuple[str, ...] = ()

    @property
    def length(self) -> float:
        return g.polyline_length(list(self.centerline))

    def start_heading(self) -> float:
        return g.vertex_heading(list(self.centerline), 0)

    def end_heading(self) -> float:
        return g.vertex_heading(list(self.centerline), len(self.centerline) - 1)


@dataclass(frozen=True)
class Maneuver:
    id: str
    type: ManeuverType
    start_lane: str
    connecting_lane: str
    end_lane: str
    intersection: str


@dataclass(frozen=True)
class Intersection:
    id: str
    ring: tuple[g.Point, ...]
    maneuver_ids: tuple[str, ...]
    incoming_lanes: tuple[str, ...]

    @property
    def is3Way(self) -> bool:
        return len(self.incoming_lanes) == 3

    @property
    def is4Way(self) -> bool:
        return len(self.incoming_lanes) == 4


@dataclass(frozen=True)
class Region:
    """Polygonal union; containment is even-odd per ring, union across rings."""

    id: str
    polygons: tuple[tuple[g.Point, ...], ...]

    def contains(self, p: g.Point) -> bool:
        return any(g.point_in_ring(p, list(ring)) for ring in self.polygons)

    def distance_to(self, p: g.Point) -> float:
        if self.contains(p):
            return 0.0
        return min(g.ring_boundary_distance(p, list(ring)) for ring in self.polygons)


@dataclass(frozen=True)
class RoadNetwork:
    name: str
    lanes: dict[str, Lane]
    maneuvers: dict[str, Maneuver]
    intersections: dict[str, Intersection]
    regions: dict[str, Region] = field(default_factory=dict)
    # geometry is immutable, so conflict queries are memoized
    _conflict_cache: dict = field(default_factory=dict, compare=False, repr=False)

    # --- deterministic collection views ---

    def lane_list(self) -> list[Lane]:
        return [self.lanes[k] for k in sorted(self.lanes)]

    def intersection_list(self) -> list[Intersection]:
        return [self.intersections[k] for k in sorted(self.intersections)]

    def maneuver_list(self) -> list[Maneuver]:
        return [self.maneuvers[k] for k in sorted(self.maneuvers)]

    @property
    def drivable_region(self) -> Region:
        return self.regions["drivableRegion"]

    def dsl_symbols(self) -> frozenset[str]:
        """Attribute names programs may reference on ``network``."""
        return frozenset({"intersections", "lanes", "drivableRegion"})

    # --- queries ---

    def maneuvers_of(self, lane: Lane | str) -> list[Maneuver]:
        lane_id = lane if isinstance(lane, str) else lane.id
        return [m for m in self.maneuver_list() if m.start_lane == lane_id]

    def maneuvers_at(self, intersection: Intersection | str) -> list[Maneuver]:
        iid = intersection if isinstance(intersection, str) else intersection.id
        return [self.maneuvers[k] for k in sorted(self.intersections[iid].maneuver_ids)]

    def conflicting_maneuvers(self, m: Maneuver, step: float = 0.25) -> list[Maneuver]:
        """Maneuvers at the same intersection, from a different start lane,
        whose swept connecting area overlaps m's.

        Swept area = connecting centerline buffered by half the lane width a
        side, so two maneuvers conflict iff the sampled centerlines come
        closer than the sum of the half-widths. Overlap must exceed 1 mm:
        symmetric junctions produce exactly-tangent footprints (adjacent
        lanes), which are not conflicts and must not flip on coordinate
        rounding in map files.
        """
        key = (m.id, step)
        cached = self._conflict_cache.get(key)
        if cached is not None:
            return list(cached)
        mine = self.lanes[m.connecting_lane]
        my_line = list(mine.centerline)
        out = []
        for other in self.maneuvers_at(m.intersection):
            if other.start_lane == m.start_lane:
                continue
            lane = self.lanes[other.connecting_lane]
            threshold = (mine.width + lane.width) / 2.0 - 1e-3
            if g.min_polyline_distance(my_line, list(lane.centerline), step) < threshold:
                out.append(other)
        self._conflict_cache[key] = tuple(out)
        return out


def maneuvers_of(network: RoadNetwork, lane: Lane | str) -> list[Maneuver]:
    return network.maneuvers_of(lane)


def conflicting_maneuvers(network: RoadNetwork, m: Maneuver) -> list[Maneuver]:
    return network.conflicting_maneuvers(m)


def point_in_region(point: g.Point, region: Region) -> bool:
    return region.contains(point)


def distance_to_region(point: g.Point, region: Region) -> float:
    return region.distance_to(point)


def classify_turn(start_heading: float, end_heading: float,
                  threshold_deg: float = 30.0) -> ManeuverType:
    """Signed heading change: left beyond +threshold, right beyond -threshold."""
    import math

    delta = g.normalize_angle(end_heading - start_heading)
    limit = math.radians(threshold_deg)
    if delta > limit:
        return ManeuverType.LEFT_TURN
    if delta < -limit:
        return ManeuverType.RIGHT_TURN
    return ManeuverType.STRAIGHT
