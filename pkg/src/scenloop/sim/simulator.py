"""Discrete-time kinematic executor for sampled scenes.

Per step, every agent contributes at most one control layer's worth of
actions; speeds integrate as
``speed' = clamp(speed + (throttle*a_max - brake*b_max)*dt, 0, v_cmd)`` and
positions advance along the agent's heading, steered by pure pursuit when a
path is active. A scene ends on the first of: a behavior's ``terminate``, a
``terminate when`` condition, a collision, or the time cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..dsl import nodes as n
from ..roads import geometry as g
from ..roads.model import RoadNetwork
from ..sampler import evaluator as ev
from ..sampler.scene import Scene
from . import behaviors as bh
from .trace import (COLLISION, TERMINATE_STATEMENT, TERMINATE_WHEN, TIME_LIMIT,
                    AgentSnap, Event, Snapshot, Termination, Trace)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.1
    a_max: float = 3.0          # m/s^2 at full throttle
    b_max: float = 8.0          # m/s^2 at full brake
    max_duration: float = 30.0  # scene cap, seconds
    car_radius: float = 2.0
    pedestrian_radius: float = 0.4
    lookahead: float = 4.0

    def radius(self, kind: str) -> float:
        return self.car_radius if kind == "Car" else self.pedestrian_radius


@dataclass
class AgentState:
    name: str
    kind: str
    position: g.Point
    heading: float
    speed: float = 0.0
    throttle: float = 0.0
    brake: float = 0.0
    runner: object = None
    done: bool = False
    controls: bh.Control = field(default_factory=bh.Control)


class _SimWorld:
    def __init__(self, agents: dict[str, AgentState]):
        self.agents = agents

    def object_pose(self, name: str):
        a = self.agents[name]
        return a.position, a.heading

    def object_speed(self, name: str) -> float:
        return self.agents[name].speed

    def object_names(self) -> list[str]:
        return list(self.agents)


def _steer_along_path(state: AgentState, path: list[g.Point], displacement: float,
                      lookahead: float) -> None:
    s, total = bh._project_arclength(path, state.position)
    target, _ = g.point_at_arclength(path, min(total, s + lookahead))
    alpha = g.normalize_angle(
        math.atan2(target[1] - state.position[1], target[0] - state.position[0])
        - state.heading)
    curvature = 2.0 * math.sin(alpha) / lookahead
    state.heading = g.normalize_angle(state.heading + curvature * displacement)


def run_scene(scene: Scene, network: RoadNetwork, program: n.ScenarioProgram,
              config: SimConfig = SimConfig()) -> Trace:
    """Simulate one scene to a Trace. Deterministic for identical inputs."""
    agents: dict[str, AgentState] = {}
    for obj in scene.objects:
        agents[obj.name] = AgentState(obj.name, obj.kind, obj.position, obj.heading)
    world = _SimWorld(agents)

    base_bindings: dict[str, object] = {}
    base_bindings.update(ev.standard_bindings(network))
    base_bindings.update(ev.behavior_factories(program))
    base_bindings.update(scene.binding_dict())
    base_bindings["globalParameters"] = ev.global_params_value(scene.param_dict())
    for obj in scene.objects:
        base_bindings[obj.name] = ev.ObjectRef(obj.name)

    events: list[Event] = []
    clock = [0.0]

    def log_event(kind: str, agent: str, detail: str) -> None:
        events.append(Event(clock[0], kind, agent, detail))

    for obj in scene.objects:
        if obj.behavior is None:
            agents[obj.name].done = True
            continue
        env = bh.AgentEnv(obj.name, network, base_bindings, world, program, log_event)
        agents[obj.name].runner = bh.make_behavior_runner(obj.behavior, env)

    term_ctx = ev.EvalContext(network, base_bindings, world)
    snapshots = [_snapshot(0.0, agents, scene)]
    max_steps = int(round(config.max_duration / config.dt))
    termination: Termination | None = None

    for step in range(1, max_steps + 1):
        t = round(step * config.dt, 9)
        clock[0] = t
        terminated_by: str | None = None

        # behaviors observe the world as of the start of the step
        for name in (o.name for o in scene.objects):
            state = agents[name]
            state.controls = bh.Control()
            if state.done or state.runner is None:
                continue
            try:
                status, control = state.runner.step()
            except bh.TerminateScene as sig:
                if terminated_by is None:
                    terminated_by = sig.agent
                state.done = True
                continue
            if status in (bh.DONE, bh.ACT_DONE):
                state.done = True
                log_event("behavior_done", name, "")
            if status in (bh.ACT, bh.ACT_DONE) and control is not None:
                state.controls = control

        # kinematics
        for name in (o.name for o in scene.objects):
            state = agents[name]
            c = state.controls
            state.throttle = c.throttle
            state.brake = c.brake
            dv = (c.throttle * config.a_max - c.brake * config.b_max) * config.dt
            state.speed = max(0.0, min(state.speed + dv, c.v_cmd))
            displacement = state.speed * config.dt
            if c.path is not None and displacement > 0:
                _steer_along_path(state, c.path, displacement, config.lookahead)
            if displacement > 0:
                state.position = (
                    state.position[0] + displacement * math.cos(state.heading),
                    state.position[1] + displacement * math.sin(state.heading))

        snapshots.append(_snapshot(t, agents, scene))

        collision_agent: str | None = None
        names = [o.name for o in scene.objects]
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                a, b = agents[names[i]], agents[names[j]]
                if g.dist(a.position, b.position) < (config.radius(a.kind)
                                                     + config.radius(b.kind)):
                    log_event("collision", a.name, b.name)
                    if collision_agent is None:
                        collision_agent = a.name

        when_index: int | None = None
        for idx, clause in enumerate(program.terminations):
            if ev.evaluate(clause.cond, term_ctx):
                when_index = idx
                break

        if terminated_by is not None:
            termination = Termination(TERMINATE_STATEMENT, t, agent=terminated_by)
        elif when_index is not None:
            termination = Termination(TERMINATE_WHEN, t, index=when_index)
        elif collision_agent is not None:
            termination = Termination(COLLISION, t, agent=collision_agent)
        if termination is not None:
            break

    if termination is None:
        termination = Termination(TIME_LIMIT, round(max_steps * config.dt, 9))
    return Trace(scene.map_name, config.dt, tuple(snapshots), tuple(events), termination)


def _snapshot(t: float, agents: dict[str, AgentState], scene: Scene) -> Snapshot:
    return Snapshot(t, tuple(
        AgentSnap(o.name, agents[o.name].position[0], agents[o.name].position[1],
                  agents[o.name].heading, agents[o.name].speed,
                  agents[o.name].throttle, agents[o.name].brake)
        for o in scene.objects))
