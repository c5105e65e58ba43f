"""Acceptance criteria, one test per criterion, exact tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS line per
criterion.
"""

import json
import math
import random
import subprocess
import sys
from pathlib import Path

import pytest

from scenloop.config import WorkbenchConfig, default_corpus_dir, resolve_map_path
from scenloop.corpus import load_corpus
from scenloop.dsl import parse, validate
from scenloop.dsl import nodes as n
from scenloop.evalharness import (EvalRecord, cumulative_success_by_queries,
                                  cumulative_success_by_turn)
from scenloop.gateway import ScriptedBackend, wrap_in_scenic_fence
from scenloop.prompting import (Message, PromptState, TrainingExample,
                                append_feedback, build_initial_prompt, heuristic4)
from scenloop.roads import load_network
from scenloop.sampler import (MAX_ITERATIONS, RejectionExhausted, evaluate,
                              EvalContext, sample_scene, scene_to_text,
                              standard_bindings)
from scenloop.session import (AWAITING_USER, FAILED, NEEDS_USER_HELP,
                              Orchestrator, TurnsExhausted)
from scenloop.sim import SimConfig, run_scene, trace_to_text

REPO = Path(__file__).parents[1]
REFERENCE = REPO / "tests" / "fixtures" / "reference"


def _passed(criterion: str):
    print(f"\n[acceptance] {criterion}: PASS")


# --- criterion 1: corpus compilation ---

def test_criterion_1_corpus_compilation(reference_sources):
    for name, source in reference_sources.items():
        program = parse(source)
        assert validate(program) == [], name
    corpus = load_corpus(default_corpus_dir())
    assert len(corpus.entries) == 32
    for entry in corpus.entries:
        program = parse(entry.code)
        network = load_network(resolve_map_path(entry.map))
        assert validate(program, network.dsl_symbols()) == [], entry.id

    misspelled = reference_sources["right_turn_adv_straight_v1"].replace(
        "with behaviour FollowTrajectoryBehavior(",
        "with behaviour FolowTrajectoryBehavior(")
    diags = validate(parse(misspelled))
    assert [d.code for d in diags] == ["UnknownBehavior"]

    program = parse(reference_sources["right_turn_adv_straight_v1"])
    without_ego = n.ScenarioProgram(
        statements=tuple(s for s in program.statements
                         if not (isinstance(s, n.ObjectDecl) and s.name == "ego")),
        docstring=program.docstring)
    assert "NoEgoDefined" in [d.code for d in validate(without_ego)]
    _passed("criterion 1 (corpus compilation)")


# --- criterion 2: rejection cap ---

def test_criterion_2_rejection_cap(straight_net):
    program = parse(
        "param carla_map = 'town_straight'\n"
        "spawn = OrientedPoint in network.lanes[0].centerline\n"
        "ego = Car at spawn\n"
        "require 1 > 2\n")
    with pytest.raises(RejectionExhausted) as exc:
        sample_scene(program, straight_net, seed=7)
    assert exc.value.iterations == 2000 == MAX_ITERATIONS
    assert sum(exc.value.histogram.values()) == 2000
    _passed("criterion 2 (rejection cap exactly 2000)")


# --- criterion 3: budget arithmetic ---

def _sized_example(i: int, pair_tokens: int = 512) -> TrainingExample:
    half = pair_tokens // 2
    fence_overhead = len("```scenic\n") + len("```")
    return TrainingExample(f"e{i}", "d" * (half * 4),
                           "c" * (half * 4 - fence_overhead))


def test_criterion_3_budget_arithmetic():
    system_text = "s" * (300 * 4)
    description = "u" * (50 * 4)
    examples = [_sized_example(i) for i in range(16)]
    state = build_initial_prompt(examples, description, random.Random(0),
                                 6500, system_text)
    assert len(state.pairs) == 12
    assert state.total_tokens() == 300 + 50 + 12 * 512 == 6494

    feedback = "e" * (300 * 4 - len("An error has occurred: "))
    trimmed = append_feedback(state, "error", feedback)
    assert len(trimmed.pairs) == 11  # exactly one pair dropped
    assert trimmed.total_tokens() == 6494 + 300 - 512
    _passed("criterion 3 (budget arithmetic: 12 pairs, one-pair trim)")


# --- criterion 4: protocol fidelity ---

def _orchestrator(tmp_path, responses):
    backend = ScriptedBackend(list(responses))
    config = WorkbenchConfig(backend="scripted",
                             sessions_root=str(tmp_path / "sessions"))
    return Orchestrator(config, clock=lambda: 0.0,
                        backend_factory=lambda spec, sid: backend)


def test_criterion_4_protocol_fidelity(tmp_path, right_turn_v1):
    fenced = "Here:\n\n" + wrap_in_scenic_fence(right_turn_v1.rstrip("\n"))
    broken = fenced.replace("behaviour EgoBehavior(trajectory):",
                            "behaviour EgoBehavior(trajectory:")

    orch = _orchestrator(tmp_path / "a", [broken, fenced])
    session = orch.start_session("A right turn.", session_id="s1")
    assert session.state == AWAITING_USER
    assert session.queries_per_turn() == [2]
    roles = [r["role"] for r in orch.store("s1").prompt_records()]
    contents = [r["content"] for r in orch.store("s1").prompt_records()]
    i = roles.index("assistant")
    assert roles[i:i + 3] == ["assistant", "user", "assistant"]
    assert contents[i + 1].startswith("An error has occurred: ")

    orch = _orchestrator(tmp_path / "b", ["junk"] * 9)
    session = orch.start_session("whatever", session_id="s2")
    assert session.state == NEEDS_USER_HELP
    assert session.queries_per_turn() == [5]

    orch = _orchestrator(tmp_path / "c", [fenced] * 5)
    orch.start_session("A right turn.", session_id="s3")
    for k in range(4):
        orch.user_comment("s3", f"variation {k}")
    with pytest.raises(TurnsExhausted):
        orch.user_comment("s3", "one too many")
    assert orch.load("s3").state == FAILED
    _passed("criterion 4 (protocol fidelity: 2 queries, 5-query cap, Failed)")


# --- criterion 5: Fig. 2 metric fixtures ---

def test_criterion_5_metric_fixtures():
    records = (
        [EvalRecord(f"a{i}", "success", 1, 1, (1,)) for i in range(5)]
        + [EvalRecord("b0", "success", 1, 2, (2,))]
        + [EvalRecord(f"c{i}", "success", 2, 2, (1, 1)) for i in range(2)]
        + [EvalRecord(f"f{i}", "failure", None, 5, (1,) * 5) for i in range(8)])
    by_turn = cumulative_success_by_turn(records, 5)
    assert [f"{v:.4f}" for v in by_turn] == [
        "0.3750", "0.5000", "0.5000", "0.5000", "0.5000"]
    by_queries = cumulative_success_by_queries(records, 25)
    assert [f"{v:.4f}" for v in by_queries[:2]] == ["0.3125", "0.5000"]
    _passed("criterion 5 (cumulative success CDFs: 0.3750/0.5000 and 0.3125/0.5000)")


# --- criterion 6: property suites ---

FAST_PROGRAM = """\
param carla_map = 'Town04'
param EGO_SPEED = VerifaiRange(6, 9)
param START_MIN = VerifaiRange(10, 40)
TERM_DIST = 15
egoLane = filter(lambda l: l.id == 'slow', network.lanes)[0]
laneStart = egoLane.centerline[0]
egoTrajectory = [egoLane]
egoSpawnPt = OrientedPoint in egoLane.centerline
ego = Car at egoSpawnPt,
    with behaviour FollowTrajectoryBehavior(target_speed=globalParameters.EGO_SPEED, trajectory=egoTrajectory)
other = Car at laneStart
require (distance from ego to laneStart) > globalParameters.START_MIN
require (distance from ego to egoLane.centerline[-1]) > 30
terminate when (distance to egoSpawnPt) > TERM_DIST
"""

WATCHER_PROGRAM = """\
param carla_map = 'Town04'
SAFETY_DIST = 60
CRASH_DIST = 25
behaviour Watcher(trajectory):
    try:
        do FollowTrajectoryBehavior(target_speed=8, trajectory=trajectory)
    interrupt when withinDistanceToAnyObjs(self, SAFETY_DIST):
        take SetThrottleAction(0.3)
    interrupt when withinDistanceToAnyObjs(self, CRASH_DIST):
        take SetBrakeAction(1.0)
egoLane = filter(lambda l: l.id == 'slow', network.lanes)[0]
egoTrajectory = [egoLane]
egoSpawnPt = OrientedPoint in egoLane.centerline
ego = Car at egoSpawnPt,
    with behaviour Watcher(egoTrajectory)
blocker = Car at egoLane.centerline[-1],
    with regionContainedIn None
require (distance from ego to egoLane.centerline[-1]) > 100
terminate when (distance to egoSpawnPt) > 90
"""


def test_criterion_6_property_suites(straight_net, cross4, right_turn_v1):
    config = SimConfig()
    program = parse(FAST_PROGRAM)
    assert validate(program, straight_net.dsl_symbols()) == []

    # determinism + requirements + ranges: 1000 seeds
    cases = 0
    for seed in range(1000):
        scene = sample_scene(program, straight_net, seed)
        again = sample_scene(parse(FAST_PROGRAM), straight_net, seed)
        assert scene_to_text(scene) == scene_to_text(again)
        params = scene.param_dict()
        assert 6.0 <= params["EGO_SPEED"] <= 9.0
        assert 10.0 <= params["START_MIN"] <= 40.0
        bindings = dict(standard_bindings(straight_net))
        bindings.update(scene.binding_dict())
        bindings["globalParameters"] = __import__(
            "scenloop.sampler.evaluator", fromlist=["global_params_value"]
        ).global_params_value(params)
        from scenloop.sampler.evaluator import ObjectRef
        for obj in scene.objects:
            bindings[obj.name] = ObjectRef(obj.name)
        world = _SceneWorld(scene)
        ctx = EvalContext(straight_net, bindings, world)
        for req in program.requirements:
            assert evaluate(req.cond, ctx) is True
        cases += 1
    assert cases >= 1000

    # trace determinism + kinematic continuity: 1000 scenes simulated twice
    steps_checked = 0
    for seed in range(1000):
        scene = sample_scene(program, straight_net, seed)
        t1 = run_scene(scene, straight_net, program, config)
        t2 = run_scene(scene, straight_net, program, config)
        assert trace_to_text(t1) == trace_to_text(t2)
        for prev, cur in zip(t1.snapshots, t1.snapshots[1:]):
            for a_prev in prev.agents:
                a_cur = cur.agent(a_prev.name)
                moved = math.hypot(a_cur.x - a_prev.x, a_cur.y - a_prev.y)
                assert moved <= (a_prev.speed + config.a_max * config.dt) * config.dt + 1e-9
                steps_checked += 1
    assert steps_checked >= 1000

    # subsumption priority: the higher layer's action excludes the lower's
    watcher = parse(WATCHER_PROGRAM)
    assert validate(watcher, straight_net.dsl_symbols()) == []
    layer_cases = 0
    for seed in range(120):
        scene = sample_scene(watcher, straight_net, seed)
        trace = run_scene(scene, straight_net, watcher, config)
        for prev, cur in zip(trace.snapshots, trace.snapshots[1:]):
            ego_prev = prev.agent("ego")
            blocker_prev = prev.agent("blocker")
            gap = math.hypot(ego_prev.x - blocker_prev.x, ego_prev.y - blocker_prev.y)
            ego = cur.agent("ego")
            if gap < 25.0:
                assert ego.brake == 1.0 and ego.throttle == 0.0
                layer_cases += 1
            elif gap < 60.0:
                assert ego.throttle == 0.3 and ego.brake == 0.0
                layer_cases += 1
    assert layer_cases >= 1000

    # brake handler of the reference program: non-increasing speed while braking
    program_b1 = parse(right_turn_v1)
    brake_cases = 0
    for seed in range(45):
        scene = sample_scene(program_b1, cross4, seed)
        trace = run_scene(scene, cross4, program_b1, config)
        prev_speed = None
        for snap in trace.snapshots:
            ego = snap.agent("ego")
            if ego.brake > 0 and prev_speed is not None:
                assert ego.speed <= prev_speed + 1e-12
                brake_cases += 1
            prev_speed = ego.speed
    assert brake_cases >= 1000
    _passed("criterion 6 (property suites, zero counterexamples)")


class _SceneWorld:
    def __init__(self, scene):
        self.poses = {o.name: (o.position, o.heading) for o in scene.objects}

    def object_pose(self, name):
        return self.poses[name]

    def object_speed(self, name):
        return 0.0

    def object_names(self):
        return list(self.poses)


# --- criterion 7: two-stage behavioral reproduction ---

def test_criterion_7_two_stage_reproduction(tmp_path, right_turn_v1, right_turn_v2):
    responses = ["First:\n\n" + wrap_in_scenic_fence(right_turn_v1.rstrip("\n")),
                 "Updated:\n\n" + wrap_in_scenic_fence(right_turn_v2.rstrip("\n"))]
    orch = _orchestrator(tmp_path, responses)
    session = orch.start_session(
        "Ego vehicle makes a right turn at 4-way intersection while adversary "
        "vehicle from lateral lane goes straight.", session_id="s1")
    assert session.state == AWAITING_USER

    from scenloop.sim import trace_from_text
    store = orch.store("s1")
    min_distances = []
    for j in range(3):
        trace = trace_from_text(store.read_trace(1, j))
        min_distances.append(trace.min_pairwise_distance("ego", "adversary"))
    # frozen from simulating the fixture seeds (100..102): 7.34 / 5.55 / 4.49
    assert min(min_distances) < 15.0
    assert min_distances == pytest.approx([7.339, 5.547, 4.487], abs=0.01)

    session = orch.user_comment("s1", "Use a higher safety distance")
    assert session.state == AWAITING_USER

    first = store.read_code(1).splitlines()
    second = store.read_code(2).splitlines()
    assert len(first) == len(second)
    changed = [(a, b) for a, b in zip(first, second) if a != b]
    assert len(changed) == 1
    assert changed[0][0] == "param SAFETY_DIST = VerifaiRange(10, 20)"
    assert changed[0][1].startswith("param SAFETY_DIST = VerifaiRange(15, 25)")

    def safety_range(code: str):
        program = parse(code)
        (decl,) = [p for p in program.params if p.name == "SAFETY_DIST"]
        return tuple(arg.value for arg in decl.value.args)

    low1, high1 = safety_range(store.read_code(1))
    low2, high2 = safety_range(store.read_code(2))
    assert (low2, high2) > (low1, high1)  # braking activates earlier
    _passed("criterion 7 (two-stage reproduction: distances and one-line diff)")


# --- criterion 8: end-to-end batch determinism ---

def test_criterion_8_batch_determinism(tmp_path):
    def run(out: Path):
        result = subprocess.run(
            [sys.executable, "-m", "scenloop.cli", "eval", "run",
             "--backend", f"scriptdir:{REPO / 'evalpack' / 'scripts'}",
             "--out", str(out), "--workers", "4",
             "--sessions-root", str(out / "sessions")],
            capture_output=True, text=True, timeout=600)
        assert result.returncode == 0, result.stderr
        return result

    first = run(tmp_path / "one")
    second = run(tmp_path / "two")
    assert "8/16 scenarios succeeded" in first.stdout
    report_names = ["success_cdf.csv", "per_scenario.csv", "summary.json",
                    "records.jsonl"]
    for name in report_names:
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "two" / name).read_bytes()
        assert a == b, name
    summary = json.loads((tmp_path / "one" / "summary.json").read_text())
    assert summary["cdf_by_turn"][:2] == [0.375, 0.5]
    assert summary["cdf_by_queries"][:2] == [0.3125, 0.5]
    _passed("criterion 8 (byte-identical eval reports)")
