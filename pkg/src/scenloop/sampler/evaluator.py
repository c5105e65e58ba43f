"""Expression evaluation over road-network values.

Shared between the scene sampler (where random draws are live and objects
are the initial placements) and the simulator (where objects are live agent
states and drawing is an error). Value-level constraint failures raise
:class:`Rejection`; type-level failures raise :class:`SourceError` with an
EvaluationError diagnostic, which aborts and is fed back to the LLM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

from ..diagnostics import NO_SPAN, SourceError, Span, error
from ..dsl import nodes as n
from ..roads import geometry as g
from ..roads.model import Intersection, Lane, Maneuver, ManeuverType, Region, RoadNetwork


class Rejection(Exception):
    """A scene candidate violated a value-level constraint; resample."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def evaluation_error(message: str, span: Span = NO_SPAN) -> SourceError:
    return SourceError([error("EvaluationError", message, span)])


# --- runtime values ---


@dataclass(frozen=True)
class OrientedPoint:
    position: g.Point
    heading: float


@dataclass(frozen=True)
class Polyline:
    points: tuple[g.Point, ...]
    lane_id: str | None = None

    def vertex(self, index: int) -> OrientedPoint:
        pts = list(self.points)
        i = index if index >= 0 else len(pts) + index
        if not 0 <= i < len(pts):
            raise evaluation_error(f"centerline index {index} out of range")
        return OrientedPoint(pts[i], g.vertex_heading(pts, i))


@dataclass(frozen=True)
class ObjectRef:
    """A declared scene object; pose is looked up in the active world view."""

    name: str


@dataclass(frozen=True)
class BehaviorValue:
    """A behavior instantiation with evaluated arguments."""

    name: str
    args: tuple = ()
    kwargs: tuple[tuple[str, object], ...] = ()


class _Marker:
    def __init__(self, label: str):
        self.label = label

    def __repr__(self):
        return self.label


ORIENTED_POINT_CLASS = _Marker("OrientedPoint")
CAR_CLASS = _Marker("Car")
PEDESTRIAN_CLASS = _Marker("Pedestrian")


class WorldView(Protocol):
    def object_pose(self, name: str) -> tuple[g.Point, float]: ...
    def object_speed(self, name: str) -> float: ...
    def object_names(self) -> list[str]: ...


class _NetworkValue:
    def __init__(self, network: RoadNetwork):
        self.network = network


class _GlobalParams:
    def __init__(self, params: dict[str, object]):
        self.params = params


@dataclass
class EvalContext:
    network: RoadNetwork
    bindings: dict[str, object]
    world: WorldView | None = None
    # draw(kind, payload, span) -> value; None outside the sampling stage
    draw: Callable | None = None

    def child(self, local: dict[str, object]) -> "EvalContext":
        merged = dict(self.bindings)
        merged.update(local)
        return EvalContext(self.network, merged, self.world, self.draw)


def standard_bindings(network: RoadNetwork) -> dict[str, object]:
    return {
        "network": _NetworkValue(network),
        "ManeuverType": ManeuverType,
        "OrientedPoint": ORIENTED_POINT_CLASS,
        "Car": CAR_CLASS,
        "Pedestrian": PEDESTRIAN_CLASS,
    }


# --- evaluation ---


def evaluate(expr: n.Expr, ctx: EvalContext):
    if isinstance(expr, n.Name):
        if expr.id in ctx.bindings:
            return ctx.bindings[expr.id]
        raise evaluation_error(f"name '{expr.id}' is not defined", expr.span)
    if isinstance(expr, n.Num):
        return expr.value
    if isinstance(expr, n.Str):
        return expr.value
    if isinstance(expr, n.Const):
        return expr.value
    if isinstance(expr, n.ListExpr):
        return [evaluate(item, ctx) for item in expr.items]
    if isinstance(expr, n.Attribute):
        return _attribute(expr, ctx)
    if isinstance(expr, n.Index):
        return _index(expr, ctx)
    if isinstance(expr, n.Call):
        return _call(expr, ctx)
    if isinstance(expr, n.Compare):
        return _compare(expr, ctx)
    if isinstance(expr, n.BinOp):
        return _binop(expr, ctx)
    if isinstance(expr, n.UnaryOp):
        operand = evaluate(expr.operand, ctx)
        if expr.op == "not":
            return not _truthy(operand, expr.span)
        _need_number(operand, "-", expr.span)
        return -operand
    if isinstance(expr, n.BoolOp):
        if expr.op == "and":
            value = True
            for v in expr.values:
                value = _truthy(evaluate(v, ctx), expr.span)
                if not value:
                    return False
            return bool(value)
        for v in expr.values:
            if _truthy(evaluate(v, ctx), expr.span):
                return True
        return False
    if isinstance(expr, n.Lambda):
        return expr  # applied by filter()
    if isinstance(expr, n.DistanceTo):
        return _distance(_ego_position(ctx, expr.span), evaluate(expr.target, ctx),
                         ctx, expr.span)
    if isinstance(expr, n.DistanceFrom):
        src = _as_position(evaluate(expr.source, ctx), ctx, expr.span)
        return _distance(src, evaluate(expr.target, ctx), ctx, expr.span)
    raise evaluation_error(f"cannot evaluate {type(expr).__name__}", getattr(expr, "span", NO_SPAN))


def _truthy(value, span: Span) -> bool:
    if isinstance(value, (bool, int, float)):
        return bool(value)
    if value is None:
        return False
    raise evaluation_error("condition did not evaluate to a boolean", span)


def _need_number(value, op: str, span: Span) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise evaluation_error(f"unsupported operand for {op}: {_describe(value)}", span)


def _describe(value) -> str:
    if isinstance(value, Lane):
        return "lane"
    if isinstance(value, Maneuver):
        return "maneuver"
    if isinstance(value, Intersection):
        return "intersection"
    if isinstance(value, Region):
        return "region"
    if isinstance(value, Polyline):
        return "centerline"
    if isinstance(value, (ObjectRef, OrientedPoint)):
        return "point"
    return type(value).__name__


def _attribute(expr: n.Attribute, ctx: EvalContext):
    base = evaluate(expr.value, ctx)
    attr = expr.attr
    net = ctx.network
    if isinstance(base, _NetworkValue):
        if attr == "intersections":
            return net.intersection_list()
        if attr == "lanes":
            return net.lane_list()
        if attr == "drivableRegion":
            return net.drivable_region
        if attr in net.regions:
            return net.regions[attr]
        raise evaluation_error(f"road network has no attribute '{attr}'", expr.span)
    if isinstance(base, _GlobalParams):
        if attr in base.params:
            return base.params[attr]
        raise evaluation_error(f"scenario has no param '{attr}'", expr.span)
    if base is ManeuverType:
        try:
            return ManeuverType[attr]
        except KeyError:
            raise evaluation_error(f"ManeuverType has no member '{attr}'", expr.span)
    if isinstance(base, Lane):
        if attr == "centerline":
            return Polyline(base.centerline, base.id)
        if attr == "width":
            return base.width
        if attr == "id":
            return base.id
        if attr == "maneuvers":
            return net.maneuvers_of(base)
        if attr == "successors":
            return [net.lanes[i] for i in base.successors]
        if attr == "predecessors":
            return [net.lanes[i] for i in base.predecessors]
        raise evaluation_error(f"lane has no attribute '{attr}'", expr.span)
    if isinstance(base, Intersection):
        if attr == "incomingLanes":
            return [net.lanes[i] for i in base.incoming_lanes]
        if attr == "maneuvers":
            return net.maneuvers_at(base)
        if attr == "is3Way":
            return base.is3Way
        if attr == "is4Way":
            return base.is4Way
        if attr == "id":
            return base.id
        if attr == "region":
            return Region(base.id, (base.ring,))
        raise evaluation_error(f"intersection has no attribute '{attr}'", expr.span)
    if isinstance(base, Maneuver):
        if attr == "type":
            return base.type
        if attr == "startLane":
            return net.lanes[base.start_lane]
        if attr == "connectingLane":
            return net.lanes[base.connecting_lane]
        if attr == "endLane":
            return net.lanes[base.end_lane]
        if attr == "intersection":
            return net.intersections[base.intersection]
        if attr == "conflictingManeuvers":
            return net.conflicting_maneuvers(base)
        raise evaluation_error(f"maneuver has no attribute '{attr}'", expr.span)
    if isinstance(base, (ObjectRef, OrientedPoint)):
        pos, heading = _pose_of(base, ctx, expr.span)
        if attr == "heading":
            return heading
        if attr == "position":
            return OrientedPoint(pos, heading)
        if attr == "speed" and isinstance(base, ObjectRef):
            return _world(ctx, expr.span).object_speed(base.name)
        raise evaluation_error(f"object has no attribute '{attr}'", expr.span)
    raise evaluation_error(
        f"{_describe(base)} has no attribute '{attr}'", expr.span)


def _index(expr: n.Index, ctx: EvalContext):
    base = evaluate(expr.value, ctx)
    idx = evaluate(expr.index, ctx)
    if not isinstance(idx, (int, float)) or isinstance(idx, bool) or idx != int(idx):
        raise evaluation_error("index must be an integer", expr.span)
    i = int(idx)
    if isinstance(base, Polyline):
        return base.vertex(i)
    if isinstance(base, list):
        if not -len(base) <= i < len(base):
            raise evaluation_error(f"index {i} out of range", expr.span)
        return base[i]
    raise evaluation_error(f"cannot index a {_describe(base)}", expr.span)


def _call(expr: n.Call, ctx: EvalContext):
    if not isinstance(expr.func, n.Name):
        raise evaluation_error("only named functions can be called", expr.span)
    name = expr.func.id
    args = [evaluate(a, ctx) for a in expr.args]
    kwargs = {k: evaluate(v, ctx) for k, v in expr.kwargs}
    star = evaluate(expr.star_arg, ctx) if expr.star_arg is not None else None

    if name == "VerifaiRange":
        if len(args) != 2 or kwargs or star is not None:
            raise evaluation_error("VerifaiRange takes two numbers", expr.span)
        low, high = args
        _need_number(low, "VerifaiRange", expr.span)
        _need_number(high, "VerifaiRange", expr.span)
        if low > high:
            raise evaluation_error(
                f"VerifaiRange low {low!r} exceeds high {high!r}", expr.span)
        return _draw(ctx, expr.span, "uniform", (float(low), float(high)))
    if name == "Uniform":
        if star is not None and not isinstance(star, list):
            raise evaluation_error("Uniform(*x) needs a list", expr.span)
        candidates = list(star) if star is not None else args
        if not candidates:
            raise Rejection("empty-choice")
        return _draw(ctx, expr.span, "choice", candidates)
    if name == "filter":
        if len(args) != 2 or not isinstance(args[0], n.Lambda):
            raise evaluation_error("filter takes a lambda and a list", expr.span)
        fn, collection = args
        if not isinstance(collection, list):
            raise evaluation_error("filter needs a list", expr.span)
        out = []
        for item in collection:
            inner = ctx.child({fn.param: item})
            if _truthy(evaluate(fn.body, inner), fn.span):
                out.append(item)
        return out
    if name == "localPath":
        if len(args) != 1 or not isinstance(args[0], str):
            raise evaluation_error("localPath takes a string", expr.span)
        return args[0]
    if name == "withinDistanceToAnyObjs":
        if len(args) != 2:
            raise evaluation_error("withinDistanceToAnyObjs takes (object, distance)",
                                   expr.span)
        return within_distance_to_any_objs(args[0], args[1], ctx, expr.span)
    # behavior instantiation and actions resolve through bindings
    target = ctx.bindings.get(name)
    if isinstance(target, _BehaviorFactory):
        return BehaviorValue(name, tuple(args), tuple(sorted(kwargs.items())))
    if isinstance(target, _ActionFactory):
        if len(args) != 1:
            raise evaluation_error(f"{name} takes one number", expr.span)
        _need_number(args[0], name, expr.span)
        return ActionValue(name, float(args[0]))
    raise evaluation_error(f"name '{name}' is not callable", expr.span)


@dataclass(frozen=True)
class ActionValue:
    name: str  # SetBrakeAction | SetThrottleAction
    amount: float


class _BehaviorFactory:
    """Marker binding for behavior names (user-defined and builtin)."""

    def __init__(self, name: str):
        self.name = name


class _ActionFactory:
    def __init__(self, name: str):
        self.name = name


def behavior_factories(program) -> dict[str, object]:
    out: dict[str, object] = {}
    for name in ("FollowTrajectoryBehavior", "CrossingBehavior"):
        out[name] = _BehaviorFactory(name)
    for name in ("SetBrakeAction", "SetThrottleAction"):
        out[name] = _ActionFactory(name)
    for name in program.behaviors:
        out[name] = _BehaviorFactory(name)
    return out


def global_params_value(params: dict[str, object]) -> _GlobalParams:
    return _GlobalParams(params)


def within_distance_to_any_objs(obj, distance, ctx: EvalContext, span: Span) -> bool:
    if not isinstance(obj, ObjectRef):
        raise evaluation_error("withinDistanceToAnyObjs needs a scene object", span)
    _need_number(distance, "withinDistanceToAnyObjs", span)
    world = _world(ctx, span)
    mine, _ = world.object_pose(obj.name)
    best = math.inf
    for name in world.object_names():
        if name == obj.name:
            continue
        pos, _ = world.object_pose(name)
        best = min(best, g.dist(mine, pos))
    return best < distance


def _draw(ctx: EvalContext, span: Span, kind: str, payload):
    if ctx.draw is None:
        raise evaluation_error("random draw outside the sampling stage", span)
    return ctx.draw(kind, payload)


def _compare(expr: n.Compare, ctx: EvalContext):
    left = evaluate(expr.first, ctx)
    result: object = True
    for op, rhs_expr in zip(expr.ops, expr.rest):
        right = evaluate(rhs_expr, ctx)
        if op == "in":
            value = _op_in(left, right, ctx, expr.span)
            if isinstance(value, OrientedPoint):
                return value  # OrientedPoint in <centerline/region> yields a point
            ok = value
        elif op == "is":
            ok = left is right
        elif op in ("==", "!="):
            same = type(left) is type(right) or (
                isinstance(left, (int, float)) and isinstance(right, (int, float)))
            equal = same and left == right
            ok = equal if op == "==" else not equal
        else:
            _need_number(left, op, expr.span)
            _need_number(right, op, expr.span)
            ok = {"<": left < right, "<=": left <= right,
                  ">": left > right, ">=": left >= right}[op]
        if not ok:
            return False
        left = right
        result = ok
    return bool(result)


def _op_in(left, right, ctx: EvalContext, span: Span):
    if left is ORIENTED_POINT_CLASS:
        if isinstance(right, Polyline):
            return _sample_on_polyline(right, ctx, span)
        if isinstance(right, Region):
            return _sample_in_region(right, ctx, span)
        raise evaluation_error(
            f"cannot place an OrientedPoint in a {_describe(right)}", span)
    if isinstance(right, Region):
        pos = _as_position(left, ctx, span)
        return right.contains(pos)
    if isinstance(right, list):
        return any(left is item or left == item for item in right)
    raise evaluation_error(
        f"right operand of 'in' must be a region, centerline or list, "
        f"not {_describe(right)}", span)


def _sample_on_polyline(line: Polyline, ctx: EvalContext, span: Span) -> OrientedPoint:
    pts = list(line.points)
    total = g.polyline_length(pts)
    if total <= 0.0:
        raise evaluation_error("cannot place a point on a zero-length centerline", span)
    s = _draw(ctx, span, "uniform", (0.0, total))
    pos, heading = g.point_at_arclength(pts, s)
    return OrientedPoint(pos, heading)


def _sample_in_region(region: Region, ctx: EvalContext, span: Span) -> OrientedPoint:
    xs = [p[0] for ring in region.polygons for p in ring]
    ys = [p[1] for ring in region.polygons for p in ring]
    for _ in range(100):
        x = _draw(ctx, span, "uniform", (min(xs), max(xs)))
        y = _draw(ctx, span, "uniform", (min(ys), max(ys)))
        if region.contains((x, y)):
            heading = _draw(ctx, span, "uniform", (-math.pi, math.pi))
            return OrientedPoint((x, y), heading)
    raise Rejection("region-sample")


def _binop(expr: n.BinOp, ctx: EvalContext):
    left = evaluate(expr.left, ctx)
    right = evaluate(expr.right, ctx)
    if expr.op == "+" and isinstance(left, list) and isinstance(right, list):
        return left + right
    _need_number(left, expr.op, expr.span)
    _need_number(right, expr.op, expr.span)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        if right == 0:
            raise evaluation_error("division by zero", expr.span)
        return left / right
    raise evaluation_error(f"unknown operator {expr.op}", expr.span)


# --- positions and distances ---


def _world(ctx: EvalContext, span: Span) -> WorldView:
    if ctx.world is None:
        raise evaluation_error("no scene objects are available here", span)
    return ctx.world


def _pose_of(value, ctx: EvalContext, span: Span) -> tuple[g.Point, float]:
    if isinstance(value, OrientedPoint):
        return value.position, value.heading
    if isinstance(value, ObjectRef):
        return _world(ctx, span).object_pose(value.name)
    raise evaluation_error(f"expected an oriented point, got {_describe(value)}", span)


def _as_position(value, ctx: EvalContext, span: Span) -> g.Point:
    return _pose_of(value, ctx, span)[0]


def _ego_position(ctx: EvalContext, span: Span) -> g.Point:
    return _world(ctx, span).object_pose("ego")[0]


def _distance(origin: g.Point, target, ctx: EvalContext, span: Span) -> float:
    if isinstance(target, Region):
        return target.distance_to(origin)
    if isinstance(target, Intersection):
        return Region(target.id, (target.ring,)).distance_to(origin)
    if isinstance(target, Lane):
        return _polyline_distance(origin, list(target.centerline))
    if isinstance(target, Polyline):
        return _polyline_distance(origin, list(target.points))
    if isinstance(target, (ObjectRef, OrientedPoint)):
        return g.dist(origin, _as_position(target, ctx, span))
    raise evaluation_error(f"cannot measure distance to a {_describe(target)}", span)


def _polyline_distance(p: g.Point, pts: list[g.Point]) -> float:
    return min(g.point_segment_distance(p, pts[i], pts[i + 1])
               for i in range(len(pts) - 1))
