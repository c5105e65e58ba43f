"""Scene sampling: distributions, expression evaluation, rejection loop."""

from .evaluator import (BehaviorValue, EvalContext, ObjectRef, OrientedPoint,
                        Polyline, Rejection, evaluate, standard_bindings,
                        within_distance_to_any_objs)
from .sampler import (MAX_ITERATIONS, RejectionExhausted, evaluate_expression,
                      place_oriented, sample_scene)
from .scene import PlacedObject, Scene, scene_from_text, scene_to_text

__all__ = [
    "Scene", "PlacedObject", "sample_scene", "RejectionExhausted",
    "MAX_ITERATIONS", "evaluate_expression", "place_oriented", "evaluate",
    "EvalContext", "Rejection", "BehaviorValue", "ObjectRef", "OrientedPoint",
    "Polyline", "scene_to_text", "scene_from_text", "standard_bindings",
    "within_distance_to_any_objs",
]
