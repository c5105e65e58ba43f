"""Behavior execution: layered try/interrupt control and builtin behaviors.

Each agent steps its behavior once per simulation step and produces at most
one control contribution. Interrupt clauses are monitored every step; the
highest-priority true condition (the last clause wins) preempts the try body
and every lower handler. A completed handler returns control to whatever it
preempted on the next step, and may fire again later - the corpus `flag`
idiom exists to suppress exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..diagnostics import NO_SPAN, SourceError, Span, error
from ..dsl import nodes as n
from ..roads import geometry as g
from ..roads.model import Lane, RoadNetwork
from ..sampler.evaluator import (ActionValue, BehaviorValue, EvalContext,
                                 ObjectRef, evaluate)

DONE = "done"          # completed, no action this step
WAIT = "wait"          # consumed the step without acting
ACT = "act"            # took an action, more statements remain
ACT_DONE = "act_done"  # took an action and completed


@dataclass
class Control:
    """Per-step control contribution of a behavior layer."""

    throttle: float = 0.0
    brake: float = 0.0
    v_cmd: float = math.inf
    path: list[g.Point] | None = None  # steer along this path when present
    taken: ActionValue | None = None   # explicit `take`, for the event log


class TerminateScene(Exception):
    """A behavior executed `terminate`."""

    def __init__(self, agent: str):
        self.agent = agent
        super().__init__(agent)


class VMError(SourceError):
    pass


def unbound_local(name: str, span: Span) -> VMError:
    return VMError([error(
        "UnboundLocal", f"local variable '{name}' referenced before assignment", span)])


def disconnected(where: str) -> VMError:
    return VMError([error(
        "DisconnectedTrajectory", f"trajectory lanes do not form a connected path "
        f"({where})", NO_SPAN)])


def _names_in(expr: n.Expr) -> set[str]:
    out: set[str] = set()

    def walk(e):
        if isinstance(e, n.Name):
            out.add(e.id)
        elif isinstance(e, n.Lambda):
            inner = _names_in(e.body)
            inner.discard(e.param)
            out.update(inner)
        else:
            for f in getattr(e, "__dataclass_fields__", {}):
                v = getattr(e, f)
                if isinstance(v, tuple):
                    for item in v:
                        if hasattr(item, "__dataclass_fields__"):
                            walk(item)
                elif hasattr(v, "__dataclass_fields__"):
                    walk(v)

    walk(expr)
    return out


class Frame:
    """Shared evaluation scope of one behavior invocation."""

    _MISSING = object()

    def __init__(self, env: "AgentEnv", params: dict[str, object], locals_declared: set[str]):
        self.env = env
        self.scope: dict[str, object] = dict(params)
        for name in locals_declared:
            if name not in self.scope:
                self.scope[name] = self._MISSING

    def eval(self, expr: n.Expr):
        for name in _names_in(expr):
            if self.scope.get(name) is self._MISSING:
                raise unbound_local(name, getattr(expr, "span", NO_SPAN))
        bindings = dict(self.env.base_bindings)
        bindings.update({k: v for k, v in self.scope.items() if v is not self._MISSING})
        ctx = EvalContext(self.env.network, bindings, self.env.world)
        return evaluate(expr, ctx)

    def assign(self, name: str, value) -> None:
        self.scope[name] = value


@dataclass
class AgentEnv:
    """Everything a behavior needs to evaluate expressions at run time."""

    agent: str
    network: RoadNetwork
    base_bindings: dict[str, object]
    world: object  # live WorldView
    program: n.ScenarioProgram
    log_event: object  # callable(kind, agent, detail)


# --- statement runners ---


class StmtListRunner:
    _FUEL = 1000  # non-yielding statements allowed per step before forcing a wait

    def __init__(self, stmts: tuple[n.BehaviorStmt, ...], frame: Frame, env: AgentEnv):
        self.stmts = stmts
        self.frame = frame
        self.env = env
        self.index = 0
        self.sub = None  # active nested runner (do / while / try)

    def step(self) -> tuple[str, Control | None]:
        fuel = self._FUEL
        while True:
            if self.sub is not None:
                status, control = self.sub.step()
                if status in (ACT, WAIT):
                    return status, control
                self.sub = None
                self.index += 1
                if status == ACT_DONE:
                    return (ACT_DONE if self.index >= len(self.stmts) else ACT), control
                continue  # DONE without an action: next statement, same step
            if self.index >= len(self.stmts):
                return DONE, None
            stmt = self.stmts[self.index]
            if isinstance(stmt, n.AssignStmt):
                self.frame.assign(stmt.name, self.frame.eval(stmt.value))
                self.index += 1
                fuel -= 1
                if fuel <= 0:
                    return WAIT, None
                continue
            if isinstance(stmt, n.TakeStmt):
                value = self.frame.eval(stmt.action)
                if not isinstance(value, ActionValue):
                    raise VMError([error(
                        "EvaluationError", "take needs an action", stmt.span)])
                self.index += 1
                self.env.log_event("action", self.env.agent,
                                   f"{value.name}({value.amount})")
                control = Control(taken=value)
                if value.name == "SetBrakeAction":
                    control.brake = min(1.0, max(0.0, value.amount))
                else:
                    control.throttle = min(1.0, max(0.0, value.amount))
                return (ACT_DONE if self.index >= len(self.stmts) else ACT), control
            if isinstance(stmt, n.TerminateStmt):
                raise TerminateScene(self.env.agent)
            if isinstance(stmt, n.DoStmt):
                self.sub = make_behavior_runner(self.frame.eval(stmt.call), self.env)
                continue
            if isinstance(stmt, n.WhileStmt):
                self.sub = _WhileRunner(stmt, self.frame, self.env)
                continue
            if isinstance(stmt, n.TryInterrupt):
                self.sub = TryRunner(stmt, self.frame, self.env)
                continue
            raise VMError([error(
                "EvaluationError", f"cannot execute {type(stmt).__name__}",
                getattr(stmt, "span", NO_SPAN))])


class _WhileRunner:
    def __init__(self, stmt: n.WhileStmt, frame: Frame, env: AgentEnv):
        self.stmt = stmt
        self.frame = frame
        self.env = env
        self.body: StmtListRunner | None = None

    def step(self) -> tuple[str, Control | None]:
        for _ in range(StmtListRunner._FUEL):
            if self.body is None:
                if not self.frame.eval(self.stmt.cond):
                    return DONE, None
                self.body = StmtListRunner(self.stmt.body, self.frame, self.env)
            status, control = self.body.step()
            if status == DONE:
                self.body = None
                continue
            if status == ACT_DONE:
                self.body = None  # iteration finished; condition re-checked next step
                return ACT, control
            return status, control
        return WAIT, None  # loop body yields nothing; spend the step


class TryRunner:
    """Subsumption layering: layer 0 is the try body, clause i is layer i+1."""

    def __init__(self, stmt: n.TryInterrupt, frame: Frame, env: AgentEnv):
        self.stmt = stmt
        self.frame = frame
        self.env = env
        self.layers: dict[int, StmtListRunner] = {
            0: StmtListRunner(stmt.body, frame, env)}

    def _active_layer(self) -> int:
        return max(self.layers)

    def _highest_true(self) -> int | None:
        for i in range(len(self.stmt.handlers), 0, -1):
            if self.frame.eval(self.stmt.handlers[i - 1].cond):
                return i
        return None

    def step(self) -> tuple[str, Control | None]:
        fired = self._highest_true()
        active = self._active_layer()
        if fired is not None and fired > active:
            self.layers[fired] = StmtListRunner(
                self.stmt.handlers[fired - 1].body, self.frame, self.env)
            self.env.log_event("interrupt_enter", self.env.agent, f"clause {fired}")
            active = fired
        status, control = self.layers[active].step()
        if status in (ACT, WAIT):
            return status, control
        if active == 0:
            return status, control  # the whole try completed
        del self.layers[active]
        self.env.log_event("interrupt_exit", self.env.agent, f"clause {active}")
        if status == ACT_DONE:
            return ACT, control  # handler acted on its way out; body resumes next step
        return WAIT, None  # handler completed without acting; the step is spent


# --- builtin behaviors ---


class FollowTrajectoryRunner:
    COMPLETE_WITHIN = 0.5  # meters of path end
    LOOKAHEAD = 4.0

    def __init__(self, target_speed: float, trajectory: list[Lane], env: AgentEnv):
        if not isinstance(target_speed, (int, float)):
            raise VMError([error("EvaluationError",
                                 "FollowTrajectoryBehavior target_speed must be a number",
                                 NO_SPAN)])
        if (not isinstance(trajectory, list) or not trajectory
                or not all(isinstance(item, Lane) for item in trajectory)):
            raise disconnected("trajectory must be a non-empty lane list")
        self.env = env
        self.target_speed = float(target_speed)
        self.path: list[g.Point] = []
        for i, lane in enumerate(trajectory):
            pts = list(lane.centerline)
            if self.path:
                if g.dist(self.path[-1], pts[0]) > 1.0:
                    raise disconnected(
                        f"lane '{trajectory[i - 1].id}' does not connect to "
                        f"'{lane.id}'")
                pts = pts[1:] if g.dist(self.path[-1], pts[0]) < 1e-9 else pts
            self.path.extend(pts)

    def step(self) -> tuple[str, Control | None]:
        pos, _ = self.env.world.object_pose(self.env.agent)
        s, total = _project_arclength(self.path, pos)
        if total - s < self.COMPLETE_WITHIN:
            return DONE, None
        return ACT, Control(throttle=1.0, v_cmd=self.target_speed, path=self.path)


class CrossingRunner:
    """Idle until the reference agent comes within the threshold, then walk a
    line perpendicular to the reference agent's lane, through the spawn
    point, long enough to cross the whole road (2 lanes + 4 m margin)."""

    def __init__(self, ref, min_speed: float, threshold: float, env: AgentEnv):
        if not isinstance(ref, ObjectRef):
            raise VMError([error("EvaluationError",
                                 "CrossingBehavior needs a reference object", NO_SPAN)])
        self.env = env
        self.ref = ref.name
        self.min_speed = float(min_speed)
        self.threshold = float(threshold)
        self.path: list[g.Point] | None = None
        self.phase = "idle"

    def _crossing_path(self) -> list[g.Point]:
        spawn, _ = self.env.world.object_pose(self.env.agent)
        ref_pos, _ = self.env.world.object_pose(self.ref)
        lane = _nearest_lane(self.env.network, ref_pos)
        pts = list(lane.centerline)
        s, _ = _project_arclength(pts, spawn)
        on_lane, lane_heading = g.point_at_arclength(pts, s)
        normal = (-math.sin(lane_heading), math.cos(lane_heading))
        to_lane = (on_lane[0] - spawn[0], on_lane[1] - spawn[1])
        side = 1.0 if (to_lane[0] * normal[0] + to_lane[1] * normal[1]) >= 0 else -1.0
        length = 2 * lane.width + 4.0
        end = (spawn[0] + side * normal[0] * length, spawn[1] + side * normal[1] * length)
        return [spawn, end]

    def step(self) -> tuple[str, Control | None]:
        pos, _ = self.env.world.object_pose(self.env.agent)
        if self.phase == "idle":
            ref_pos, _ = self.env.world.object_pose(self.ref)
            if g.dist(pos, ref_pos) < self.threshold:
                self.phase = "walking"
                self.path = self._crossing_path()
            else:
                return WAIT, None
        if self.phase == "walking":
            s, total = _project_arclength(self.path, pos)
            if total - s < 0.1:
                self.phase = "stopping"
            else:
                return ACT, Control(throttle=1.0, v_cmd=self.min_speed, path=self.path)
        if self.phase == "stopping":
            if self.env.world.object_speed(self.env.agent) <= 1e-9:
                self.phase = "standing"
            else:
                return ACT, Control(brake=1.0)
        return WAIT, None  # standing


def make_behavior_runner(value: BehaviorValue, env: AgentEnv):
    if not isinstance(value, BehaviorValue):
        raise VMError([error("EvaluationError", "do needs a behavior", NO_SPAN)])
    kwargs = dict(value.kwargs)
    if value.name == "FollowTrajectoryBehavior":
        args = list(value.args)
        target = kwargs.get("target_speed", args[0] if args else None)
        trajectory = kwargs.get("trajectory", args[1] if len(args) > 1 else None)
        return FollowTrajectoryRunner(target, trajectory, env)
    if value.name == "CrossingBehavior":
        args = list(value.args)
        ref = kwargs.get("ref", args[0] if args else None)
        min_speed = kwargs.get("min_speed", args[1] if len(args) > 1 else 1.0)
        threshold = kwargs.get("threshold", args[2] if len(args) > 2 else 10.0)
        return CrossingRunner(ref, min_speed, threshold, env)
    definition = env.program.behaviors.get(value.name)
    if definition is None:
        raise VMError([error("EvaluationError",
                             f"behavior '{value.name}' is not defined", NO_SPAN)])
    params: dict[str, object] = {"self": ObjectRef(env.agent)}
    for i, arg in enumerate(value.args):
        if i < len(definition.parameters):
            params[definition.parameters[i]] = arg
    params.update(kwargs)
    declared = _locals_of(definition.body)
    frame = Frame(env, params, declared)
    return StmtListRunner(definition.body, frame, env)


def _locals_of(body: tuple[n.BehaviorStmt, ...]) -> set[str]:
    out: set[str] = set()
    for stmt in body:
        if isinstance(stmt, n.AssignStmt):
            out.add(stmt.name)
        elif isinstance(stmt, n.WhileStmt):
            out |= _locals_of(stmt.body)
        elif isinstance(stmt, n.TryInterrupt):
            out |= _locals_of(stmt.body)
            for clause in stmt.handlers:
                out |= _locals_of(clause.body)
    return out


# --- path helpers ---


def _project_arclength(path: list[g.Point], pos: g.Point) -> tuple[float, float]:
    """Arc length of the closest point on the path, and the total length."""
    best_d = math.inf
    best_s = 0.0
    s = 0.0
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        seg = g.dist(a, b)
        if seg > 0:
            t = max(0.0, min(1.0, ((pos[0] - a[0]) * (b[0] - a[0])
                                   + (pos[1] - a[1]) * (b[1] - a[1])) / (seg * seg)))
            proj = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            d = g.dist(pos, proj)
            if d < best_d - 1e-12:
                best_d = d
                best_s = s + t * seg
        s += seg
    return best_s, s


def _nearest_lane(network: RoadNetwork, pos: g.Point) -> Lane:
    best: Lane | None = None
    best_d = math.inf
    for lane in network.lane_list():
        pts = list(lane.centerline)
        d = min(g.point_segment_distance(pos, pts[i], pts[i + 1])
                for i in range(len(pts) - 1))
        if d < best_d - 1e-12:
            best = lane
            best_d = d
    assert best is not None
    return best
