"""Road network model, loader and geometric queries."""

from .loader import (DanglingLaneReference, DegenerateCenterline, MapError,
                     SchemaError, load_network, load_network_data)
from .model import (Intersection, Lane, Maneuver, ManeuverType, Region,
                    RoadNetwork, classify_turn, conflicting_maneuvers,
                    distance_to_region, maneuvers_of, point_in_region)

__all__ = [
    "RoadNetwork", "Lane", "Maneuver", "ManeuverType", "Intersection", "Region",
    "load_network", "load_network_data", "maneuvers_of", "conflicting_maneuvers",
    "point_in_region", "distance_to_region", "classify_turn",
    "MapError", "SchemaError", "DanglingLaneReference", "DegenerateCenterline",
]
