import math

import pytest

from scenloop.diagnostics import SourceError
from scenloop.dsl import parse
from scenloop.sampler import (BehaviorValue, EvalContext, ObjectRef, OrientedPoint,
                              sample_scene, standard_bindings,
                              within_distance_to_any_objs)
from scenloop.sampler.scene import PlacedObject, Scene
from scenloop.sim import SimConfig, run_scene, trace_to_text
from scenloop.sim.trace import COLLISION, TERMINATE_STATEMENT, TERMINATE_WHEN, TIME_LIMIT


def _scene(objects, params=(), bindings=(), map_name="town_cross4"):
    return Scene(0, map_name, 1, tuple(params), tuple(bindings), tuple(objects))


def _empty_program(extra=""):
    return parse(extra)


def test_stationary_agent_hits_time_limit_at_exactly_30s(cross4):
    scene = _scene([PlacedObject("ego", "Car", (1.75, -50.0), math.pi / 2)])
    trace = run_scene(scene, cross4, _empty_program())
    assert trace.termination.kind == TIME_LIMIT
    assert trace.duration == 30.0
    assert len(trace.snapshots) == 301
    first, last = trace.snapshots[0].agent("ego"), trace.snapshots[-1].agent("ego")
    assert (first.x, first.y) == (last.x, last.y)


def test_constant_throttle_matches_closed_form(cross4):
    lane = cross4.lanes["S_in"]
    behavior = BehaviorValue("FollowTrajectoryBehavior", (),
                             (("target_speed", 8.0), ("trajectory", [lane])))
    start = lane.centerline[0]
    scene = _scene([PlacedObject("ego", "Car", start, math.pi / 2, behavior=behavior)])
    config = SimConfig()
    trace = run_scene(scene, cross4, _empty_program(), config)
    for k, snap in enumerate(trace.snapshots[:60]):
        expected = min(k * config.a_max * config.dt, 8.0)
        actual = snap.agent("ego").speed
        if expected == 8.0:
            assert actual == 8.0  # the clamp pin is exact
        else:
            # float accumulation vs closed form: identical to within 1e-9
            assert actual == pytest.approx(expected, abs=1e-9)


def test_follow_trajectory_right_turn_heading_change(cross4):
    lanes = [cross4.lanes[i] for i in ("S_in", "c_S_E", "E_out")]
    behavior = BehaviorValue("FollowTrajectoryBehavior", (),
                             (("target_speed", 8.0), ("trajectory", lanes)))
    start = (1.75, -43.5)  # 40 m before the intersection
    scene = _scene([PlacedObject("ego", "Car", start, math.pi / 2, behavior=behavior)])
    trace = run_scene(scene, cross4, _empty_program())
    first = trace.snapshots[0].agent("ego")
    last = trace.snapshots[-1].agent("ego")
    dh = math.degrees(math.atan2(math.sin(last.heading - first.heading),
                                 math.cos(last.heading - first.heading)))
    assert -100.0 <= dh <= -80.0
    assert last.x > 60.0  # well down the exit lane


def _briefing_program():
    # two-layer interrupt behavior exercising priority and braking
    return parse(
        "param carla_map = 'town_cross4'\n"
        "SAFETY_DIST = 100\n"
        "CRASH_DIST = 5\n"
        "behaviour Watcher(trajectory):\n"
        "    try:\n"
        "        do FollowTrajectoryBehavior(target_speed=8, trajectory=trajectory)\n"
        "    interrupt when withinDistanceToAnyObjs(self, SAFETY_DIST):\n"
        "        take SetThrottleAction(0.3)\n"
        "    interrupt when withinDistanceToAnyObjs(self, CRASH_DIST):\n"
        "        take SetBrakeAction(1.0)\n")


def test_higher_priority_interrupt_wins_when_both_true(cross4):
    program = _briefing_program()
    lane = cross4.lanes["S_in"]
    behavior = BehaviorValue("Watcher", ([lane],), ())
    scene = _scene([
        PlacedObject("ego", "Car", (1.75, -50.0), math.pi / 2, behavior=behavior),
        PlacedObject("blocker", "Car", (1.75, -46.5), math.pi / 2),
    ], bindings=(("SAFETY_DIST", 100), ("CRASH_DIST", 5)))
    trace = run_scene(scene, cross4, program)
    # blocker is 3.5 m away: both conditions hold every step; only the
    # later (higher-priority) clause may act, so there is never any throttle
    for snap in trace.snapshots[1:]:
        ego = snap.agent("ego")
        assert ego.brake == 1.0 and ego.throttle == 0.0
    assert trace.termination.kind == COLLISION  # radii 2+2 overlap at 3.5 m


def test_brake_handler_suspends_trajectory_and_is_non_increasing(cross4, right_turn_v1):
    program = parse(right_turn_v1)
    scene = sample_scene(program, cross4, seed=3)
    trace = run_scene(scene, cross4, program)
    braked = [s for s in trace.snapshots if s.agent("ego").brake > 0]
    assert braked, "expected the safety handler to fire at least once"
    prev = None
    for snap in trace.snapshots:
        ego = snap.agent("ego")
        if ego.brake > 0:
            assert ego.throttle == 0.0  # trajectory layer suspended
            if prev is not None:
                assert ego.speed <= prev + 1e-12
        prev = snap.agent("ego").speed


def test_terminate_statement_beats_other_reasons(cross4):
    program = parse(
        "param carla_map = 'x'\n"
        "behaviour Stop(trajectory):\n"
        "    terminate\n")
    behavior = BehaviorValue("Stop", ([],), ())
    scene = _scene([PlacedObject("ego", "Car", (1.75, -50.0), math.pi / 2,
                                 behavior=behavior)])
    trace = run_scene(scene, cross4, program)
    assert trace.termination.kind == TERMINATE_STATEMENT
    assert trace.termination.agent == "ego"
    assert trace.duration == 0.1  # first step
    assert trace.snapshots[-1].t == trace.termination.t


def test_terminate_when_records_clause_index(cross4, right_turn_v1):
    program = parse(right_turn_v1)
    scene = sample_scene(program, cross4, seed=1)
    trace = run_scene(scene, cross4, program)
    assert trace.termination.kind == TERMINATE_WHEN
    assert trace.termination.index == 0
    # no snapshots after the termination step
    assert trace.snapshots[-1].t == trace.termination.t
    # the condition actually holds on the final snapshot
    ego = trace.snapshots[-1].agent("ego")
    spawn = scene.binding_dict()["egoSpawnPt"]
    assert math.hypot(ego.x - spawn.position[0], ego.y - spawn.position[1]) > 70.0


def test_crossing_behavior_idle_until_threshold(cross4):
    # ego approaches at fixed speed; ped triggers within one step of 20 m
    lane = cross4.lanes["S_in"]
    follow = BehaviorValue("FollowTrajectoryBehavior", (),
                           (("target_speed", 10.0), ("trajectory", [lane])))
    cross = BehaviorValue("CrossingBehavior", (ObjectRef("ego"), 1.0, 20.0), ())
    ped_pos = (6.75, -3.5)
    scene = _scene([
        PlacedObject("ego", "Car", (1.75, -80.0), math.pi / 2, behavior=follow),
        PlacedObject("ped", "Pedestrian", ped_pos, math.pi / 2, behavior=cross,
                     region_override="null"),
    ])
    trace = run_scene(scene, cross4, _empty_program())
    first_move = next(i for i, s in enumerate(trace.snapshots)
                      if s.agent("ped").speed > 0)
    first_within = next(
        i for i, s in enumerate(trace.snapshots)
        if math.hypot(s.agent("ego").x - s.agent("ped").x,
                      s.agent("ego").y - s.agent("ped").y) < 20.0)
    assert first_within <= first_move <= first_within + 1


def test_crossing_behavior_never_moves_when_ref_far(cross4):
    cross = BehaviorValue("CrossingBehavior", (ObjectRef("ego"), 1.0, 20.0), ())
    scene = _scene([
        PlacedObject("ego", "Car", (1.75, -100.0), math.pi / 2),
        PlacedObject("ped", "Pedestrian", (500.0, 500.0), 0.0, behavior=cross,
                     region_override="null"),
    ])
    trace = run_scene(scene, cross4, _empty_program())
    assert trace.termination.kind == TIME_LIMIT
    ped0, pedN = trace.snapshots[0].agent("ped"), trace.snapshots[-1].agent("ped")
    assert (ped0.x, ped0.y) == (pedN.x, pedN.y)


class _StubWorld:
    def __init__(self, poses):
        self.poses = poses

    def object_pose(self, name):
        return self.poses[name], 0.0

    def object_speed(self, name):
        return 0.0

    def object_names(self):
        return list(self.poses)


def test_within_distance_matches_pairwise_oracle(cross4):
    import random
    rng = random.Random(3)
    for _ in range(50):
        names = [f"a{i}" for i in range(rng.randint(1, 6))]
        poses = {name: (rng.uniform(-50, 50), rng.uniform(-50, 50)) for name in names}
        world = _StubWorld(poses)
        ctx = EvalContext(cross4, standard_bindings(cross4), world)
        d = rng.uniform(1, 80)
        got = within_distance_to_any_objs(ObjectRef(names[0]), d, ctx, None)
        mine = poses[names[0]]
        oracle = any(math.hypot(mine[0] - poses[o][0], mine[1] - poses[o][1]) < d
                     for o in names[1:])
        assert got == oracle


def test_within_distance_single_agent_always_false(cross4):
    world = _StubWorld({"ego": (0.0, 0.0)})
    ctx = EvalContext(cross4, standard_bindings(cross4), world)
    assert within_distance_to_any_objs(ObjectRef("ego"), 1e9, ctx, None) is False


def test_two_agents_12m_apart_thresholds(cross4):
    world = _StubWorld({"a": (0.0, 0.0), "b": (12.0, 0.0)})
    ctx = EvalContext(cross4, standard_bindings(cross4), world)
    assert within_distance_to_any_objs(ObjectRef("a"), 15.0, ctx, None) is True
    assert within_distance_to_any_objs(ObjectRef("a"), 10.0, ctx, None) is False


def test_trace_determinism_and_kinematic_continuity(cross4, ped_cross_v1):
    program = parse(ped_cross_v1)
    config = SimConfig()
    scene = sample_scene(program, cross4, seed=6)
    t1 = run_scene(scene, cross4, program, config)
    t2 = run_scene(scene, cross4, program, config)
    assert trace_to_text(t1) == trace_to_text(t2)
    for prev, cur in zip(t1.snapshots, t1.snapshots[1:]):
        for a_prev in prev.agents:
            a_cur = cur.agent(a_prev.name)
            moved = math.hypot(a_cur.x - a_prev.x, a_cur.y - a_prev.y)
            bound = (a_prev.speed + config.a_max * config.dt) * config.dt
            assert moved <= bound + 1e-9


def test_stall_when_pedestrian_parks_within_range(cross4, ped_cross_v3):
    # a pedestrian standing on the road inside SAFETY_DIST+3 keeps the
    # braking loop's condition true forever: the car stops and waits
    program = parse(ped_cross_v3)
    behavior = BehaviorValue("EgoBehavior",
                             ([cross4.lanes[i] for i in ("S_in", "c_S_W", "W_out")],),
                             ())
    scene = Scene(0, "town_cross4", 1,
                  (("EGO_SPEED", 8.0), ("SAFETY_DIST", 12.0)),
                  (("EGO_SPEED", 8.0), ("EGO_BRAKE", 1.0), ("PED_MIN_SPEED", 1.0),
                   ("PED_THRESHOLD", 20.0), ("SAFETY_DIST", 12.0), ("CRASH_DIST", 5.0),
                   ("TERM_DIST", 50.0),
                   ("egoSpawnPt", OrientedPoint((1.75, -40.0), math.pi / 2))),
                  (PlacedObject("ego", "Car", (1.75, -40.0), math.pi / 2,
                                behavior=behavior),
                   PlacedObject("ped", "Pedestrian", (1.75, -20.0), 0.0,
                                region_override="null")))
    trace = run_scene(scene, cross4, program)
    assert trace.termination.kind == TIME_LIMIT
    tail = trace.snapshots[-50:]
    assert all(s.agent("ego").speed == 0.0 for s in tail)
    assert all(s.agent("ego").brake == 1.0 for s in tail)


def test_restart_loop_throttles_but_never_resumes_trajectory(cross4, ped_cross_v3):
    # once the other agent clears the range, the braking loop exits and the
    # second while loop holds control, throttling at 0.5 forever instead of
    # resuming the trajectory
    program = parse(ped_cross_v3)
    trajectory = [cross4.lanes[i] for i in ("S_in", "c_S_W", "W_out")]
    behavior = BehaviorValue("EgoBehavior", (trajectory,), ())
    runner = BehaviorValue("FollowTrajectoryBehavior", (),
                           (("target_speed", 8.0), ("trajectory", trajectory)))
    scene = Scene(0, "town_cross4", 1,
                  (("EGO_SPEED", 8.0), ("SAFETY_DIST", 12.0)),
                  (("EGO_SPEED", 8.0), ("EGO_BRAKE", 1.0), ("PED_MIN_SPEED", 2.0),
                   ("PED_THRESHOLD", 60.0), ("SAFETY_DIST", 12.0), ("CRASH_DIST", 3.0),
                   ("TERM_DIST", 200.0),
                   ("egoSpawnPt", OrientedPoint((1.75, -80.0), math.pi / 2))),
                  (PlacedObject("ego", "Car", (1.75, -80.0), math.pi / 2,
                                behavior=behavior),
                   PlacedObject("ped", "Pedestrian", (1.75, -74.0), math.pi / 2,
                                behavior=runner, region_override="null")))
    trace = run_scene(scene, cross4, program)
    braked = [i for i, s in enumerate(trace.snapshots) if s.agent("ego").brake > 0]
    assert braked, "the braking loop should engage first"
    started = next(i for i, s in enumerate(trace.snapshots)
                   if s.agent("ego").throttle == 0.5)
    assert started > braked[-1]
    assert all(s.agent("ego").throttle == 0.5 for s in trace.snapshots[started:-1])
    assert trace.snapshots[-1].agent("ego").speed > 8.0  # never pinned to EGO_SPEED


def test_unbound_local_is_a_runtime_diagnostic(cross4):
    program = parse(
        "param carla_map = 'x'\n"
        "behaviour Bad(trajectory):\n"
        "    while cnt < 1:\n"
        "        cnt = 1\n")
    behavior = BehaviorValue("Bad", ([],), ())
    scene = _scene([PlacedObject("ego", "Car", (0.0, 0.0), 0.0, behavior=behavior)])
    with pytest.raises(SourceError) as exc:
        run_scene(scene, cross4, program)
    assert exc.value.diagnostics[0].code == "UnboundLocal"
    assert "'cnt'" in exc.value.diagnostics[0].message


def test_collision_terminates_and_logs_event(cross4):
    lane = cross4.lanes["S_in"]
    follow = BehaviorValue("FollowTrajectoryBehavior", (),
                           (("target_speed", 10.0), ("trajectory", [lane])))
    scene = _scene([
        PlacedObject("ego", "Car", (1.75, -80.0), math.pi / 2, behavior=follow),
        PlacedObject("wall", "Car", (1.75, -50.0), math.pi / 2),
    ])
    trace = run_scene(scene, cross4, _empty_program())
    assert trace.termination.kind == COLLISION
    assert any(e.kind == "collision" for e in trace.events)
    # separation at the end is below the sum of the car radii
    last = trace.snapshots[-1]
    gap = math.hypot(last.agent("ego").x - last.agent("wall").x,
                     last.agent("ego").y - last.agent("wall").y)
    assert gap < 4.0


def test_disconnected_trajectory_rejected(cross4):
    lanes = [cross4.lanes["S_in"], cross4.lanes["N_in"]]
    behavior = BehaviorValue("FollowTrajectoryBehavior", (),
                             (("target_speed", 8.0), ("trajectory", lanes)))
    scene = _scene([PlacedObject("ego", "Car", (1.75, -50.0), math.pi / 2,
                                 behavior=behavior)])
    with pytest.raises(SourceError) as exc:
        run_scene(scene, cross4, _empty_program())
    assert exc.value.diagnostics[0].code == "DisconnectedTrajectory"
