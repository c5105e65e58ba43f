"""Builtin symbols of the scenario DSL and their lightweight types.

Types are plain strings; ``list:lane`` style composites carry an element
type. ``unknown`` absorbs everything the checker cannot prove, so only
provable mismatches are ever reported.
"""

from __future__ import annotations

UNKNOWN = "unknown"
NUMBER = "number"
STRING = "string"
BOOL = "bool"
NONE = "none"
POINT = "point"            # oriented point (position + heading)
REGION = "region"
POLYLINE = "polyline"
LANE = "lane"
INTERSECTION = "intersection"
MANEUVER = "maneuver"
MANEUVER_TYPE = "maneuvertype"
OBJECT = "object"          # a declared scene object
BEHAVIOR = "behavior"
ACTION = "action"
NETWORK = "network"
GLOBAL_PARAMS = "globalparams"
MANEUVER_TYPE_ENUM = "maneuvertype_enum"
ORIENTED_POINT_CLASS = "orientedpoint_class"


def list_of(elem: str) -> str:
    return f"list:{elem}"


def elem_of(t: str) -> str:
    return t.split(":", 1)[1] if t.startswith("list:") else UNKNOWN


def is_list(t: str) -> bool:
    return t.startswith("list:")


# attributes available on each structured type
ATTRIBUTES: dict[str, dict[str, str]] = {
    LANE: {
        "id": STRING,
        "width": NUMBER,
        "centerline": POLYLINE,
        "maneuvers": list_of(MANEUVER),
        "successors": list_of(LANE),
        "predecessors": list_of(LANE),
    },
    INTERSECTION: {
        "id": STRING,
        "incomingLanes": list_of(LANE),
        "maneuvers": list_of(MANEUVER),
        "is3Way": BOOL,
        "is4Way": BOOL,
        "region": REGION,
    },
    MANEUVER: {
        "type": MANEUVER_TYPE,
        "startLane": LANE,
        "connectingLane": LANE,
        "endLane": LANE,
        "intersection": INTERSECTION,
        "conflictingManeuvers": list_of(MANEUVER),
    },
    OBJECT: {
        "heading": NUMBER,
        "position": POINT,
        "speed": NUMBER,
    },
    POINT: {
        "heading": NUMBER,
        "position": POINT,
    },
}

MANEUVER_TYPE_MEMBERS = ("LEFT_TURN", "RIGHT_TURN", "STRAIGHT")

# attribute names every road network exposes to programs
NETWORK_SYMBOLS = frozenset({"intersections", "lanes", "drivableRegion"})

NETWORK_ATTR_TYPES = {
    "intersections": list_of(INTERSECTION),
    "lanes": list_of(LANE),
    "drivableRegion": REGION,
}

BUILTIN_BEHAVIORS = ("FollowTrajectoryBehavior", "CrossingBehavior")
BUILTIN_ACTIONS = ("SetBrakeAction", "SetThrottleAction")

# name -> type of builtin values visible at global scope
GLOBAL_BUILTINS: dict[str, str] = {
    "network": NETWORK,
    "globalParameters": GLOBAL_PARAMS,
    "ManeuverType": MANEUVER_TYPE_ENUM,
    "OrientedPoint": ORIENTED_POINT_CLASS,
    "Car": UNKNOWN,
    "Pedestrian": UNKNOWN,
    "Uniform": UNKNOWN,
    "VerifaiRange": UNKNOWN,
    "filter": UNKNOWN,
    "localPath": UNKNOWN,
    "withinDistanceToAnyObjs": UNKNOWN,
}
GLOBAL_BUILTINS.update({name: BEHAVIOR for name in BUILTIN_BEHAVIORS})
GLOBAL_BUILTINS.update({name: ACTION for name in BUILTIN_ACTIONS})

# property keys accepted in object declarations
OBJECT_PROPERTIES = ("blueprint", "behaviour", "behavior", "heading", "regionContainedIn")

# groups considered comparable with ==, !=, <, <=, >, >=
_NUMERIC = {NUMBER, BOOL, UNKNOWN}


def comparable(a: str, b: str) -> bool:
    if UNKNOWN in (a, b):
        return True
    if a in _NUMERIC and b in _NUMERIC:
        return True
    return a == b
