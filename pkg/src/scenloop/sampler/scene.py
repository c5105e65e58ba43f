"""Concrete scenes and their on-disk form (see docs/scene-format.md)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..roads import geometry as g
from ..roads.model import Intersection, Lane, Maneuver, ManeuverType, Region, RoadNetwork
from .evaluator import BehaviorValue, ObjectRef, OrientedPoint, Polyline

SCENE_FORMAT = 1


@dataclass(frozen=True)
class PlacedObject:
    name: str
    kind: str  # Car | Pedestrian
    position: g.Point
    heading: float
    blueprint: str | None = None
    behavior: BehaviorValue | None = None
    # None: default containment; "null": explicitly unconstrained; else region id
    region_override: str | None = None


@dataclass(frozen=True)
class Scene:
    seed: int
    map_name: str
    iterations: int
    params: tuple[tuple[str, object], ...]
    bindings: tuple[tuple[str, object], ...]
    objects: tuple[PlacedObject, ...]

    def param_dict(self) -> dict[str, object]:
        return dict(self.params)

    def binding_dict(self) -> dict[str, object]:
        return dict(self.bindings)

    def object(self, name: str) -> PlacedObject:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    def trajectory_bindings(self) -> dict[str, list[str]]:
        """Bindings whose value is a list of lanes, as lane-id lists."""
        out: dict[str, list[str]] = {}
        for name, value in self.bindings:
            if isinstance(value, list) and value and all(isinstance(v, Lane) for v in value):
                out[name] = [v.id for v in value]
        return out


def serialize_value(value) -> object:
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Lane):
        return {"$lane": value.id}
    if isinstance(value, Maneuver):
        return {"$maneuver": value.id}
    if isinstance(value, Intersection):
        return {"$intersection": value.id}
    if isinstance(value, Region):
        return {"$region": value.id}
    if isinstance(value, ManeuverType):
        return {"$maneuvertype": value.value}
    if isinstance(value, OrientedPoint):
        return {"$point": [value.position[0], value.position[1]], "heading": value.heading}
    if isinstance(value, Polyline):
        return {"$centerline": value.lane_id,
                "points": [[p[0], p[1]] for p in value.points]}
    if isinstance(value, ObjectRef):
        return {"$object": value.name}
    if isinstance(value, BehaviorValue):
        return {"$behavior": value.name,
                "args": [serialize_value(a) for a in value.args],
                "kwargs": {k: serialize_value(v) for k, v in value.kwargs}}
    if isinstance(value, list):
        return [serialize_value(v) for v in value]
    raise TypeError(f"cannot serialize scene value of type {type(value).__name__}")


def deserialize_value(raw, network: RoadNetwork):
    if raw is None or isinstance(raw, (bool, int, float, str)):
        return raw
    if isinstance(raw, list):
        return [deserialize_value(v, network) for v in raw]
    if "$lane" in raw:
        return network.lanes[raw["$lane"]]
    if "$maneuver" in raw:
        return network.maneuvers[raw["$maneuver"]]
    if "$intersection" in raw:
        return network.intersections[raw["$intersection"]]
    if "$region" in raw:
        return network.regions[raw["$region"]]
    if "$maneuvertype" in raw:
        return ManeuverType(raw["$maneuvertype"])
    if "$point" in raw:
        return OrientedPoint(tuple(raw["$point"]), raw["heading"])
    if "$centerline" in raw:
        return Polyline(tuple(tuple(p) for p in raw["points"]), raw["$centerline"])
    if "$object" in raw:
        return ObjectRef(raw["$object"])
    if "$behavior" in raw:
        return BehaviorValue(
            raw["$behavior"],
            tuple(deserialize_value(a, network) for a in raw["args"]),
            tuple(sorted((k, deserialize_value(v, network))
                         for k, v in raw["kwargs"].items())))
    raise TypeError(f"cannot deserialize scene value {raw!r}")


def scene_to_text(scene: Scene) -> str:
    """One JSON record per line: header, bindings, params, objects."""
    records: list[dict] = [{
        "record": "scene", "format": SCENE_FORMAT, "seed": scene.seed,
        "map": scene.map_name, "iterations": scene.iterations,
    }]
    for name, value in scene.params:
        records.append({"record": "param", "name": name, "value": serialize_value(value)})
    for name, value in scene.bindings:
        records.append({"record": "binding", "name": name, "value": serialize_value(value)})
    for o in scene.objects:
        records.append({
            "record": "object", "name": o.name, "kind": o.kind,
            "position": [o.position[0], o.position[1]], "heading": o.heading,
            "blueprint": o.blueprint,
            "behavior": serialize_value(o.behavior) if o.behavior else None,
            "region_override": o.region_override,
        })
    return "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"


def scene_from_text(text: str, network: RoadNetwork) -> Scene:
    header = None
    params: list[tuple[str, object]] = []
    bindings: list[tuple[str, object]] = []
    objects: list[PlacedObject] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec["record"]
        if kind == "scene":
            header = rec
        elif kind == "param":
            params.append((rec["name"], deserialize_value(rec["value"], network)))
        elif kind == "binding":
            bindings.append((rec["name"], deserialize_value(rec["value"], network)))
        elif kind == "object":
            behavior = deserialize_value(rec["behavior"], network) if rec["behavior"] else None
            objects.append(PlacedObject(
                rec["name"], rec["kind"], tuple(rec["position"]), rec["heading"],
                rec["blueprint"], behavior, rec["region_override"]))
    if header is None:
        raise ValueError("not a scene file: missing header record")
    return Scene(header["seed"], header["map"], header["iterations"],
                 tuple(params), tuple(bindings), tuple(objects))
