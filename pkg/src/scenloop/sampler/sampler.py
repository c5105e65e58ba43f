"""Rejection sampling of concrete scenes from validated programs.

All random choices are drawn top-to-bottom in program order from a
counter-based stream keyed by (seed, iteration, draw index): adding a draw
late in a program never perturbs earlier draws, which keeps scenes diffable
across small program edits during a dialogue.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..diagnostics import SourceError
from ..dsl import nodes as n
from ..dsl.unparse import expr as unparse_expr
from ..roads import geometry as g
from ..roads.model import Region, RoadNetwork
from . import evaluator as ev
from .evaluator import EvalContext, ObjectRef, OrientedPoint, Rejection
from .scene import PlacedObject, Scene

MAX_ITERATIONS = 2000


class RejectionExhausted(Exception):
    """No candidate satisfied the constraints within the iteration cap."""

    def __init__(self, iterations: int, histogram: dict[str, int], detail: str):
        self.iterations = iterations
        self.histogram = histogram
        self.detail = detail
        super().__init__(self.render())

    def render(self) -> str:
        parts = [f"{reason}: {count}" for reason, count in sorted(self.histogram.items())]
        return (f"rejection sampling failed to satisfy the scenario constraints "
                f"within {self.iterations} iterations ({'; '.join(parts)}); {self.detail}")


class _DrawStream:
    """Deterministic per-draw generator keyed by (seed, iteration, index)."""

    def __init__(self, seed: int, iteration: int):
        self.seed = seed
        self.iteration = iteration
        self.index = 0

    def __call__(self, kind: str, payload):
        rng = random.Random(f"{self.seed}:{self.iteration}:{self.index}")
        self.index += 1
        if kind == "uniform":
            low, high = payload
            return low + (high - low) * rng.random()
        if kind == "choice":
            return payload[rng.randrange(len(payload))]
        raise ValueError(kind)


@dataclass
class _PlacementWorld:
    poses: dict[str, tuple[g.Point, float]]

    def object_pose(self, name: str) -> tuple[g.Point, float]:
        return self.poses[name]

    def object_speed(self, name: str) -> float:
        return 0.0

    def object_names(self) -> list[str]:
        return list(self.poses)


def place_oriented(placement: n.Placement, ctx: EvalContext) -> tuple[g.Point, float]:
    """Evaluate a placement to a position/heading pair."""
    if isinstance(placement, n.AtPlacement):
        value = ev.evaluate(placement.point, ctx)
        if isinstance(value, OrientedPoint):
            return value.position, value.heading
        if isinstance(value, ObjectRef):
            return ctx.world.object_pose(value.name)
        raise ev.evaluation_error(
            "placement expression must produce an oriented point", placement.span)
    anchor = ev.evaluate(placement.anchor, ctx)
    if isinstance(anchor, ObjectRef):
        pos, heading = ctx.world.object_pose(anchor.name)
        anchor = OrientedPoint(pos, heading)
    if not isinstance(anchor, OrientedPoint):
        raise ev.evaluation_error(
            "offset anchor must be an oriented point", placement.span)
    distance = ev.evaluate(placement.distance, ctx)
    if not isinstance(distance, (int, float)) or isinstance(distance, bool):
        raise ev.evaluation_error("offset distance must be a number", placement.span)
    if distance < 0:
        raise ev.evaluation_error(
            f"negative distance {distance!r} in '{placement.side} of ... by' offset",
            placement.span)
    position, heading = g.offset_point(anchor.position, anchor.heading,
                                       placement.side, float(distance))
    return position, heading


def evaluate_expression(expr: n.Expr, bindings: dict, network: RoadNetwork,
                        world=None, draw=None):
    """Evaluate one expression against bindings; deterministic given inputs."""
    ctx = EvalContext(network, bindings, world, draw)
    return ev.evaluate(expr, ctx)


def _build_candidate(program: n.ScenarioProgram, network: RoadNetwork,
                     draw: _DrawStream) -> tuple[dict, list[PlacedObject]]:
    bindings: dict[str, object] = {}
    bindings.update(ev.standard_bindings(network))
    bindings.update(ev.behavior_factories(program))
    params: dict[str, object] = {}
    bindings["globalParameters"] = ev.global_params_value(params)
    world = _PlacementWorld({})
    ctx = EvalContext(network, bindings, world, draw)
    placed: dict[str, PlacedObject] = {}

    for stmt in program.statements:
        if isinstance(stmt, n.ParamDecl):
            value = ev.evaluate(stmt.value, ctx)
            params[stmt.name] = value
            bindings[stmt.name] = value
        elif isinstance(stmt, n.ConstantDecl):
            bindings[stmt.name] = ev.evaluate(stmt.value, ctx)
        elif isinstance(stmt, n.ObjectDecl):
            position, heading = place_oriented(stmt.placement, ctx)
            placed[stmt.name] = PlacedObject(stmt.name, stmt.kind, position, heading)
            world.poses[stmt.name] = (position, heading)
            bindings[stmt.name] = ObjectRef(stmt.name)
        # ModelDecl / BehaviorDef / RequireStmt / TerminateWhenStmt need no
        # evaluation at this point

    # property expressions run after all placements, in declaration order
    for stmt in program.statements:
        if not isinstance(stmt, n.ObjectDecl):
            continue
        obj = placed[stmt.name]
        blueprint = obj.blueprint
        behavior = obj.behavior
        override = obj.region_override
        heading = obj.heading
        for key, value_expr in stmt.properties:
            if key == "blueprint":
                blueprint = ev.evaluate(value_expr, ctx)
            elif key in ("behaviour", "behavior"):
                value = ev.evaluate(value_expr, ctx)
                if not isinstance(value, ev.BehaviorValue):
                    raise ev.evaluation_error(
                        "behaviour property must be a behavior call", stmt.span)
                behavior = value
            elif key == "heading":
                heading = ev.evaluate(value_expr, ctx)
            elif key == "regionContainedIn":
                value = ev.evaluate(value_expr, ctx)
                if value is None:
                    override = "null"
                elif isinstance(value, Region):
                    override = value.id
                else:
                    raise ev.evaluation_error(
                        "regionContainedIn must be a region or None", stmt.span)
        obj = PlacedObject(obj.name, obj.kind, obj.position, heading,
                           blueprint, behavior, override)
        placed[stmt.name] = obj
        world.poses[stmt.name] = (obj.position, obj.heading)

    # containment: cars default to the drivable region; "null" disables
    for name, obj in placed.items():
        if obj.region_override == "null":
            continue
        if obj.region_override is not None:
            region = network.regions[obj.region_override]
        elif obj.kind == "Car":
            region = network.drivable_region
        else:
            continue
        if not region.contains(obj.position):
            raise Rejection(f"containment[{name}]")

    # requirements, in declaration order
    for i, req in enumerate(program.requirements):
        value = ev.evaluate(req.cond, ctx)
        if not value:
            raise Rejection(f"require[{i}]")

    return bindings, list(placed.values())


def sample_scene(program: n.ScenarioProgram, network: RoadNetwork, seed: int,
                 max_iterations: int = MAX_ITERATIONS) -> Scene:
    """A Scene satisfying every requirement, or RejectionExhausted.

    Identical (program, network, seed) produce byte-identical scenes.
    Raises :class:`SourceError` for type-level evaluation failures and
    :class:`RejectionExhausted` after ``max_iterations`` rejected candidates.
    """
    histogram: dict[str, int] = {}
    for iteration in range(1, max_iterations + 1):
        draw = _DrawStream(seed, iteration)
        try:
            bindings, objects = _build_candidate(program, network, draw)
        except Rejection as r:
            histogram[r.reason] = histogram.get(r.reason, 0) + 1
            continue
        param_names = [p.name for p in program.params]
        params = tuple((name, bindings[name]) for name in param_names)
        plain = tuple(
            (s.name, bindings[s.name]) for s in program.statements
            if isinstance(s, (n.ParamDecl, n.ConstantDecl)))
        return Scene(seed, network.name, iteration, params, plain, tuple(objects))
    detail = _describe_rejections(program, histogram)
    raise RejectionExhausted(max_iterations, histogram, detail)


def _describe_rejections(program: n.ScenarioProgram, histogram: dict[str, int]) -> str:
    worst = max(histogram.items(), key=lambda kv: (kv[1], kv[0]))[0] if histogram else ""
    if worst.startswith("require["):
        index = int(worst[len("require["):-1])
        text = unparse_expr(program.requirements[index].cond)
        return f"the most-violated constraint was require {text}"
    if worst == "empty-choice":
        return "a Uniform(...) choice had no candidates to pick from"
    if worst.startswith("containment["):
        name = worst[len("containment["):-1]
        return f"object '{name}' kept landing outside its containment region"
    if worst == "region-sample":
        return "could not place an OrientedPoint inside the requested region"
    return "no constraint was satisfiable"
