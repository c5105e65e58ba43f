"""Load and validate road network files (the ``.map`` YAML schema).

See docs/map-format.md for the schema. All structural problems raise typed
errors; a network that loads is guaranteed to satisfy the model invariants
(existing lane references, >=2-point distinct centerlines, simple rings,
turn types consistent with geometry).
"""

from __future__ import annotations

from pathlib import Path

import yaml

from . import geometry as g
from .model import Intersection, Lane, Maneuver, Region, RoadNetwork, classify_turn


class MapError(Exception):
    pass


class SchemaError(MapError):
    pass


class DanglingLaneReference(MapError):
    pass


class DegenerateCenterline(MapError):
    pass


def _require(cond: bool, err: type[MapError], message: str) -> None:
    if not cond:
        raise err(message)


def _point_list(raw, where: str) -> tuple[g.Point, ...]:
    _require(isinstance(raw, list) and len(raw) >= 2, SchemaError,
             f"{where}: expected a list of at least 2 [x, y] points")
    points = []
    for i, item in enumerate(raw):
        _require(isinstance(item, list) and len(item) == 2
                 and all(isinstance(v, (int, float)) for v in item),
                 SchemaError, f"{where}[{i}]: expected [x, y]")
        points.append((float(item[0]), float(item[1])))
    return tuple(points)


def load_network_data(doc: dict) -> RoadNetwork:
    _require(isinstance(doc, dict), SchemaError, "map document must be a mapping")
    _require(doc.get("format_version") == 1, SchemaError,
             "missing or unsupported format_version (expected 1)")
    name = doc.get("name")
    _require(isinstance(name, str) and bool(name), SchemaError, "missing map name")

    lanes: dict[str, Lane] = {}
    for i, raw in enumerate(doc.get("lanes") or []):
        _require(isinstance(raw, dict), SchemaError, f"lanes[{i}]: expected a mapping")
        lane_id = raw.get("id")
        _require(isinstance(lane_id, str) and bool(lane_id), SchemaError,
                 f"lanes[{i}]: missing id")
        _require(lane_id not in lanes, SchemaError, f"duplicate lane id '{lane_id}'")
        width = raw.get("width")
        _require(isinstance(width, (int, float)) and width > 0, SchemaError,
                 f"lane '{lane_id}': missing or non-positive width")
        centerline = _point_list(raw.get("centerline"), f"lane '{lane_id}' centerline")
        for j in range(len(centerline) - 1):
            _require(centerline[j] != centerline[j + 1], DegenerateCenterline,
                     f"lane '{lane_id}': consecutive duplicate centerline point "
                     f"at index {j}")
        lanes[lane_id] = Lane(lane_id, centerline, float(width))

    maneuvers: dict[str, Maneuver] = {}
    intersections: dict[str, Intersection] = {}
    successors: dict[str, set[str]] = {lid: set() for lid in lanes}
    predecessors: dict[str, set[str]] = {lid: set() for lid in lanes}

    for i, raw in enumerate(doc.get("intersections") or []):
        _require(isinstance(raw, dict), SchemaError, f"intersections[{i}]: expected a mapping")
        iid = raw.get("id")
        _require(isinstance(iid, str) and bool(iid), SchemaError,
                 f"intersections[{i}]: missing id")
        ring = _point_list(raw.get("region"), f"intersection '{iid}' region")
        _require(g.ring_is_simple(list(ring)), SchemaError,
                 f"intersection '{iid}': region ring is self-intersecting")
        maneuver_ids: list[str] = []
        incoming: list[str] = []
        for k, mv in enumerate(raw.get("maneuvers") or []):
            _require(isinstance(mv, dict), SchemaError,
                     f"intersection '{iid}' maneuvers[{k}]: expected a mapping")
            for key in ("start", "connecting", "end"):
                lane_id = mv.get(key)
                _require(isinstance(lane_id, str), SchemaError,
                         f"intersection '{iid}' maneuvers[{k}]: missing '{key}'")
                _require(lane_id in lanes, DanglingLaneReference,
                         f"intersection '{iid}' maneuvers[{k}]: unknown lane "
                         f"'{lane_id}'")
            start, connecting, end = mv["start"], mv["connecting"], mv["end"]
            turn = classify_turn(lanes[start].end_heading(), lanes[end].start_heading())
            mid = connecting
            _require(mid not in maneuvers, SchemaError,
                     f"connecting lane '{mid}' is used by two maneuvers")
            maneuvers[mid] = Maneuver(mid, turn, start, connecting, end, iid)
            maneuver_ids.append(mid)
            if start not in incoming:
                incoming.append(start)
            successors[start].add(connecting)
            successors[connecting].add(end)
            predecessors[connecting].add(start)
            predecessors[end].add(connecting)
        intersections[iid] = Intersection(iid, ring, tuple(sorted(maneuver_ids)),
                                          tuple(sorted(incoming)))

    regions: dict[str, Region] = {}
    for i, raw in enumerate(doc.get("regions") or []):
        _require(isinstance(raw, dict), SchemaError, f"regions[{i}]: expected a mapping")
        rid = raw.get("id")
        _require(isinstance(rid, str) and bool(rid), SchemaError, f"regions[{i}]: missing id")
        rings = []
        for j, ring in enumerate(raw.get("polygons") or []):
            pts = _point_list(ring, f"region '{rid}' polygons[{j}]")
            _require(g.ring_is_simple(list(pts)), SchemaError,
                     f"region '{rid}' polygons[{j}]: ring is self-intersecting")
            rings.append(pts)
        _require(bool(rings), SchemaError, f"region '{rid}': needs at least one polygon")
        regions[rid] = Region(rid, tuple(rings))

    lanes = {
        lid: Lane(lane.id, lane.centerline, lane.width,
                  tuple(sorted(successors[lid])), tuple(sorted(predecessors[lid])))
        for lid, lane in lanes.items()
    }
    regions["drivableRegion"] = _drivable_region(lanes, intersections)
    return RoadNetwork(name, lanes, maneuvers, intersections, regions)


def _drivable_region(lanes: dict[str, Lane],
                     intersections: dict[str, Intersection]) -> Region:
    rings: list[tuple[g.Point, ...]] = []
    for lid in sorted(lanes):
        lane = lanes[lid]
        pts = list(lane.centerline)
        for i in range(len(pts) - 1):
            rings.append(tuple(g.segment_quad(pts[i], pts[i + 1], lane.width / 2)))
    for iid in sorted(intersections):
        rings.append(intersections[iid].ring)
    return Region("drivableRegion", tuple(rings))


def load_network(path: str | Path) -> RoadNetwork:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path.name}: not valid YAML: {exc}") from exc
    return load_network_data(doc)
