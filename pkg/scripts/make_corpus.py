#!/usr/bin/env python3
"""Generate and validate the bundled 32-scenario corpus.

Run from the repo root:  python3 scripts/make_corpus.py
Writes src/scenloop/data/corpus/{train,test}/<id>.scenic and manifest.yaml.

Every generated scenario is checked end to end before being written: parse,
validate, sample at the fixture seeds the session orchestrator will use
(turn 1: 100..102, turn 2: 200..202), simulate, and, for test scenarios,
pass their manifest checker on all turn-1 traces.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scenloop.config import resolve_map_path
from scenloop.dsl import parse, validate
from scenloop.evalharness import TraceChecker
from scenloop.prompting import heuristic4
from scenloop.roads import load_network
from scenloop.sampler import sample_scene
from scenloop.sim import run_scene

OUT = Path(__file__).resolve().parents[1] / "src" / "scenloop" / "data" / "corpus"

HEADER = """\
param map = localPath('Scenic/tests/formats/opendrive/maps/CARLA/{town}.xodr')
param carla_map = '{town}'
model scenic.simulators.carla.model
MODEL = 'vehicle.lincoln.mkz_2017'
"""

EGO_BRAKE_BEHAVIOR = """\
behaviour EgoBehavior(trajectory):
    try:
        do FollowTrajectoryBehavior(target_speed=globalParameters.EGO_SPEED, trajectory=trajectory)
    interrupt when withinDistanceToAnyObjs(self, globalParameters.SAFETY_DIST):
        take SetBrakeAction(globalParameters.EGO_BRAKE)
    interrupt when withinDistanceToAnyObjs(self, CRASH_DIST):
        terminate
"""

EGO_PED_BEHAVIOR = """\
behaviour EgoBehavior(trajectory):
    flag = True
    try:
        do FollowTrajectoryBehavior(target_speed=globalParameters.EGO_SPEED, trajectory=trajectory)
    interrupt when withinDistanceToAnyObjs(self, globalParameters.SAFETY_DIST) and (ped in network.drivableRegion) and flag:
        flag = False
        while withinDistanceToAnyObjs(self, globalParameters.SAFETY_DIST + 3):
            take SetBrakeAction(EGO_BRAKE)
    interrupt when withinDistanceToAnyObjs(self, CRASH_DIST):
        terminate
"""

EGO_PED_ROAD_BEHAVIOR = """\
behaviour EgoBehavior(trajectory):
    try:
        do FollowTrajectoryBehavior(target_speed=globalParameters.EGO_SPEED, trajectory=trajectory)
    interrupt when withinDistanceToAnyObjs(self, globalParameters.SAFETY_DIST) and (ped in network.drivableRegion):
        take SetBrakeAction(globalParameters.EGO_BRAKE)
    interrupt when withinDistanceToAnyObjs(self, CRASH_DIST):
        terminate
"""


def int_vehicle(town, int_filter, ego_type, adv_type, *, style="lane_first",
                ego_init=(15, 30), adv_init=(10, 20), ego_speed=(7, 10),
                adv_speed=(7, 10), safety=(10, 20), crash=5, term=70):
    lines = [HEADER.format(town=town)]
    lines.append(f"EGO_INIT_DIST = [{ego_init[0]}, {ego_init[1]}]")
    lines.append(f"param EGO_SPEED = VerifaiRange({ego_speed[0]}, {ego_speed[1]})")
    lines.append("param EGO_BRAKE = VerifaiRange(0.5, 1.0)")
    lines.append(f"ADV_INIT_DIST = [{adv_init[0]}, {adv_init[1]}]")
    lines.append(f"param ADV_SPEED = VerifaiRange({adv_speed[0]}, {adv_speed[1]})")
    lines.append(f"param SAFETY_DIST = VerifaiRange({safety[0]}, {safety[1]})")
    lines.append(f"CRASH_DIST = {crash}")
    lines.append(f"TERM_DIST = {term}")
    lines.append(EGO_BRAKE_BEHAVIOR.rstrip())
    lines.append(f"intersection = Uniform(*filter(lambda i: {int_filter}, network.intersections))")
    if style == "lane_first":
        lines.append("egoInitLane = Uniform(*intersection.incomingLanes)")
        lines.append(f"egoManeuver = Uniform(*filter(lambda m: m.type is ManeuverType.{ego_type}, egoInitLane.maneuvers))")
    else:
        lines.append(f"egoManeuver = Uniform(*filter(lambda m: m.type is ManeuverType.{ego_type}, intersection.maneuvers))")
        lines.append("egoInitLane = egoManeuver.startLane")
    lines.append("egoTrajectory = [egoInitLane, egoManeuver.connectingLane, egoManeuver.endLane]")
    lines.append("egoSpawnPt = OrientedPoint in egoInitLane.centerline")
    lines.append(f"advManeuver = Uniform(*filter(lambda m: m.type is ManeuverType.{adv_type}, egoManeuver.conflictingManeuvers))")
    lines.append("advInitLane = advManeuver.startLane")
    lines.append("advTrajectory = [advInitLane, advManeuver.connectingLane, advManeuver.endLane]")
    lines.append("advSpawnPt = OrientedPoint in advInitLane.centerline")
    lines.append("ego = Car at egoSpawnPt,\n    with blueprint MODEL,\n    with behaviour EgoBehavior(egoTrajectory)")
    lines.append("adversary = Car at advSpawnPt,\n    with blueprint MODEL,\n    with behaviour FollowTrajectoryBehavior(target_speed=globalParameters.ADV_SPEED, trajectory=advTrajectory)")
    lines.append("require EGO_INIT_DIST[0] <= (distance to intersection) <= EGO_INIT_DIST[1]")
    lines.append("require ADV_INIT_DIST[0] <= (distance from adversary to intersection) <= ADV_INIT_DIST[1]")
    lines.append("terminate when (distance to egoSpawnPt) > TERM_DIST")
    return "\n".join(lines) + "\n"


def int_pedestrian(town, int_filter, ego_type, side, *, variant="road", ped_dist=5,
                   ego_init=(15, 30), ego_speed=(7, 10), safety=(10, 15),
                   ped_speed=1.0, threshold=20, crash=5, term=50,
                   ped_ahead=(8, 20)):
    if variant == "road":
        # the encounter needs sight line: ego far enough back that the
        # pedestrian is on the road before the ego is inside braking range
        ego_init = (45, 60)
        ego_speed = (7, 9)
        ped_ahead = (33, 45)
        threshold = 60
        term = max(term, 80)
    lines = [HEADER.format(town=town)]
    lines.append(f"EGO_INIT_DIST = [{ego_init[0]}, {ego_init[1]}]")
    if variant == "road":
        lines.append(f"PED_AHEAD = [{ped_ahead[0]}, {ped_ahead[1]}]")
    lines.append(f"param EGO_SPEED = VerifaiRange({ego_speed[0]}, {ego_speed[1]})")
    if variant == "flag":
        lines.append("EGO_BRAKE = 1.0")
    else:
        lines.append("param EGO_BRAKE = VerifaiRange(0.7, 1.0)")
    lines.append(f"PED_MIN_SPEED = {ped_speed}")
    lines.append(f"PED_THRESHOLD = {threshold}")
    lines.append(f"param SAFETY_DIST = VerifaiRange({safety[0]}, {safety[1]})")
    lines.append(f"CRASH_DIST = {crash}")
    lines.append(f"TERM_DIST = {term}")
    behavior = EGO_PED_BEHAVIOR if variant == "flag" else EGO_PED_ROAD_BEHAVIOR
    lines.append(behavior.rstrip())
    lines.append(f"intersection = Uniform(*filter(lambda i: {int_filter}, network.intersections))")
    lines.append(f"egoManeuver = Uniform(*filter(lambda m: m.type is ManeuverType.{ego_type}, intersection.maneuvers))")
    lines.append("egoInitLane = egoManeuver.startLane")
    lines.append("egoTrajectory = [egoInitLane, egoManeuver.connectingLane, egoManeuver.endLane]")
    lines.append("egoSpawnPt = OrientedPoint in egoInitLane.centerline")
    if variant == "flag":
        lines.append("tempSpawnPt = egoInitLane.centerline[-1]")
        anchor = "tempSpawnPt"
    else:
        lines.append("anchorPt = OrientedPoint in egoInitLane.centerline")
        anchor = "anchorPt"
    lines.append("ego = Car at egoSpawnPt,\n    with blueprint MODEL,\n    with behaviour EgoBehavior(egoTrajectory)")
    lines.append(f"ped = Pedestrian {side} of {anchor} by {ped_dist},\n"
                 "    with heading ego.heading,\n"
                 "    with regionContainedIn None,\n"
                 "    with behaviour CrossingBehavior(ego, PED_MIN_SPEED, PED_THRESHOLD)")
    lines.append("require EGO_INIT_DIST[0] <= (distance to intersection) <= EGO_INIT_DIST[1]")
    if variant == "road":
        lines.append("require PED_AHEAD[0] <= (distance from ego to anchorPt) <= PED_AHEAD[1]")
        lines.append("require (distance from anchorPt to intersection) >= 8")
    lines.append("terminate when (distance to egoSpawnPt) > TERM_DIST")
    return "\n".join(lines) + "\n"


def hw_leader(town, lane, *, lead_speed=None, gap=(15, 30), ego_speed=(7, 9),
              safety=(10, 14), crash=4, term=60, road_ahead=120):
    lines = [HEADER.format(town=town)]
    lines.append(f"INIT_GAP = [{gap[0]}, {gap[1]}]")
    lines.append(f"param EGO_SPEED = VerifaiRange({ego_speed[0]}, {ego_speed[1]})")
    lines.append("param EGO_BRAKE = VerifaiRange(0.6, 1.0)")
    if lead_speed is not None:
        lines.append(f"param LEAD_SPEED = VerifaiRange({lead_speed[0]}, {lead_speed[1]})")
    lines.append(f"param SAFETY_DIST = VerifaiRange({safety[0]}, {safety[1]})")
    lines.append(f"CRASH_DIST = {crash}")
    lines.append(f"TERM_DIST = {term}")
    lines.append(f"MIN_ROAD_AHEAD = {road_ahead}")
    lines.append(EGO_BRAKE_BEHAVIOR.rstrip())
    lines.append(f"egoLane = filter(lambda l: l.id == '{lane}', network.lanes)[0]")
    lines.append("laneStart = egoLane.centerline[0]")
    lines.append("laneEnd = egoLane.centerline[-1]")
    lines.append("egoTrajectory = [egoLane]")
    lines.append("egoSpawnPt = OrientedPoint in egoLane.centerline")
    lines.append("leadSpawnPt = OrientedPoint in egoLane.centerline")
    lines.append("ego = Car at egoSpawnPt,\n    with blueprint MODEL,\n    with behaviour EgoBehavior(egoTrajectory)")
    if lead_speed is not None:
        lines.append("lead = Car at leadSpawnPt,\n    with blueprint MODEL,\n    with behaviour FollowTrajectoryBehavior(target_speed=globalParameters.LEAD_SPEED, trajectory=egoTrajectory)")
    else:
        lines.append("lead = Car at leadSpawnPt,\n    with blueprint MODEL")
    lines.append("require (distance from ego to laneStart) < (distance from leadSpawnPt to laneStart)")
    lines.append("require INIT_GAP[0] <= (distance from ego to lead) <= INIT_GAP[1]")
    lines.append("require (distance from leadSpawnPt to laneEnd) >= MIN_ROAD_AHEAD")
    lines.append("terminate when (distance to egoSpawnPt) > TERM_DIST")
    return "\n".join(lines) + "\n"


def hw_pedestrian(town, lane, *, side="right", offset=4, ahead=(25, 50),
                  ego_speed=(7, 9), safety=(10, 14), crash=3, term=80,
                  ped_speed=1.5, threshold=25, parked=False):
    lines = [HEADER.format(town=town)]
    lines.append(f"AHEAD = [{ahead[0]}, {ahead[1]}]")
    lines.append(f"param EGO_SPEED = VerifaiRange({ego_speed[0]}, {ego_speed[1]})")
    lines.append("param EGO_BRAKE = VerifaiRange(0.7, 1.0)")
    lines.append(f"PED_MIN_SPEED = {ped_speed}")
    lines.append(f"PED_THRESHOLD = {threshold}")
    lines.append(f"param SAFETY_DIST = VerifaiRange({safety[0]}, {safety[1]})")
    lines.append(f"CRASH_DIST = {crash}")
    lines.append(f"TERM_DIST = {term}")
    lines.append("MIN_ROAD_AHEAD = 100")
    lines.append(EGO_PED_ROAD_BEHAVIOR.rstrip())
    lines.append(f"egoLane = filter(lambda l: l.id == '{lane}', network.lanes)[0]")
    lines.append("laneStart = egoLane.centerline[0]")
    lines.append("laneEnd = egoLane.centerline[-1]")
    lines.append("egoTrajectory = [egoLane]")
    lines.append("egoSpawnPt = OrientedPoint in egoLane.centerline")
    if parked:
        lines.append("shoulderLane = filter(lambda l: l.id == 'shoulder', network.lanes)[0]")
        lines.append("anchorPt = OrientedPoint in shoulderLane.centerline")
        lines.append("parked = Car at anchorPt,\n    with blueprint MODEL")
    else:
        lines.append("anchorPt = OrientedPoint in egoLane.centerline")
    lines.append("ego = Car at egoSpawnPt,\n    with blueprint MODEL,\n    with behaviour EgoBehavior(egoTrajectory)")
    lines.append(f"ped = Pedestrian {side} of anchorPt by {offset},\n"
                 "    with regionContainedIn None,\n"
                 "    with behaviour CrossingBehavior(ego, PED_MIN_SPEED, PED_THRESHOLD)")
    lines.append("require (distance from ego to laneStart) < (distance from anchorPt to laneStart)")
    lines.append("require AHEAD[0] <= (distance from ego to anchorPt) <= AHEAD[1]")
    lines.append("require (distance from anchorPt to laneEnd) >= MIN_ROAD_AHEAD")
    lines.append("terminate when (distance to egoSpawnPt) > TERM_DIST")
    return "\n".join(lines) + "\n"


RIGHT = {"heading_change_deg": {"agent": "ego", "min": -115, "max": -65}}
LEFT = {"heading_change_deg": {"agent": "ego", "min": 65, "max": 115}}
STRAIGHT = {"heading_change_deg": {"agent": "ego", "min": -25, "max": 25}}


def _checker(*parts, termination=("TerminateWhen",), moved=30):
    spec = {"termination_in": list(termination),
            "moved_at_least": {"agent": "ego", "distance": moved}}
    for part in parts:
        spec.update(part)
    return spec


SCENARIOS = [
    # --- train (16) ---
    dict(id="t01_right_turn_cross_traffic", split="train", map="town_cross4",
         desc="Ego vehicle turns right at a 4-way intersection and brakes to yield "
              "when a crossing vehicle approaches on the lateral road.",
         code=int_vehicle("Town05", "i.is4Way", "RIGHT_TURN", "STRAIGHT")),
    dict(id="t02_left_turn_oncoming", split="train", map="town_cross4",
         desc="Ego vehicle makes an unprotected left turn at a 4-way intersection "
              "while an oncoming vehicle continues straight.",
         code=int_vehicle("Town05", "i.is4Way", "LEFT_TURN", "STRAIGHT",
                          style="maneuver_first", term=75)),
    dict(id="t03_straight_cross_traffic", split="train", map="town_cross4",
         desc="Ego vehicle drives straight through a 4-way intersection as cross "
              "traffic from a lateral lane goes straight as well.",
         code=int_vehicle("Town05", "i.is4Way", "STRAIGHT", "STRAIGHT",
                          adv_init=(15, 20))),
    dict(id="t04_straight_adv_left", split="train", map="town_cross4",
         desc="Ego vehicle goes straight at a 4-way intersection and must slow "
              "down when an adversary vehicle turns left across its path.",
         code=int_vehicle("Town05", "i.is4Way", "STRAIGHT", "LEFT_TURN",
                          style="maneuver_first")),
    dict(id="t05_right_turn_ped", split="train", map="town_cross4",
         desc="Ego vehicle turns right at an intersection while a pedestrian "
              "steps off the curb and crosses the road.",
         code=int_pedestrian("Town05", "i.is4Way", "RIGHT_TURN", "right",
                             variant="flag")),
    dict(id="t06_left_turn_ped_far", split="train", map="town_cross4",
         desc="Ego vehicle turns left at an intersection while a pedestrian "
              "crosses near the far side of the junction.",
         code=int_pedestrian("Town05", "i.is4Way", "LEFT_TURN", "left",
                             variant="flag")),
    dict(id="t07_tee_straight_adv_left", split="train", map="town_tee3",
         desc="Ego vehicle continues straight through a 3-way intersection while "
              "an adversary vehicle turns left from the side road.",
         code=int_vehicle("Town07", "i.is3Way", "STRAIGHT", "LEFT_TURN",
                          style="maneuver_first")),
    dict(id="t08_tee_right_from_stem", split="train", map="town_tee3",
         desc="Ego vehicle turns right out of a side road onto the main road "
              "while traffic on the main road goes straight.",
         code=int_vehicle("Town07", "i.is3Way", "RIGHT_TURN", "STRAIGHT")),
    dict(id="t09_tee_left_from_stem", split="train", map="town_tee3",
         desc="Ego vehicle turns left out of a side road at a T-junction, "
              "crossing the path of a vehicle going straight on the main road.",
         code=int_vehicle("Town07", "i.is3Way", "LEFT_TURN", "STRAIGHT",
                          style="maneuver_first")),
    dict(id="t10_tee_straight_ped", split="train", map="town_tee3",
         desc="Ego vehicle passes a 3-way intersection while a pedestrian "
              "crosses the main road ahead of it.",
         code=int_pedestrian("Town07", "i.is3Way", "STRAIGHT", "right",
                             variant="flag", term=60)),
    dict(id="t11_highway_slow_leader", split="train", map="town_straight",
         desc="Ego vehicle approaches a slow moving vehicle ahead in its lane on "
              "a highway and must brake to keep a safe gap.",
         code=hw_leader("Town04", "slow", lead_speed=(2, 4))),
    dict(id="t12_highway_stopped_car", split="train", map="town_straight",
         desc="Ego vehicle comes upon a stationary vehicle in its lane on a "
              "highway and must brake to a stop behind it.",
         code=hw_leader("Town04", "slow", lead_speed=None)),
    dict(id="t13_highway_ped_crossing", split="train", map="town_straight",
         desc="A pedestrian crosses a highway in front of the ego vehicle, which "
              "must brake until the pedestrian has cleared its lane.",
         code=hw_pedestrian("Town04", "slow")),
    dict(id="t14_highway_shoulder_ped", split="train", map="town_straight",
         desc="A pedestrian emerges from in front of a car parked on the "
              "shoulder and crosses the highway as the ego vehicle approaches.",
         code=hw_pedestrian("Town04", "slow", side="left", offset=3, parked=True)),
    dict(id="t15_right_turn_adv_left_merge", split="train", map="town_cross4",
         desc="Ego vehicle turns right at a 4-way intersection while an "
              "adversary vehicle turning left merges into the same exit road.",
         code=int_vehicle("Town05", "i.is4Way", "RIGHT_TURN", "LEFT_TURN",
                          adv_init=(12, 18))),
    dict(id="t16_fast_lane_leader", split="train", map="town_straight",
         desc="Ego vehicle drives in the left lane of a highway and closes in on "
              "a slower vehicle it must brake behind.",
         code=hw_leader("Town04", "fast", lead_speed=(3, 5), ego_speed=(8, 10))),

    # --- test (16) ---
    dict(id="x01_right_turn_adv_straight", split="test", map="town_cross4",
         desc="Ego vehicle makes a right turn at 4-way intersection while "
              "adversary vehicle from lateral lane goes straight.",
         code=int_vehicle("Town05", "i.is4Way", "RIGHT_TURN", "STRAIGHT",
                          safety=(12, 20), crash=4),
         checker=_checker(RIGHT),
         comments=["The ego vehicle should turn right, not left."]),
    dict(id="x02_left_turn_ped_crosswalk", split="test", map="town_cross4",
         desc="Ego vehicle makes a left turn at an intersection and must "
              "suddenly stop to avoid collision when pedestrian crosses the "
              "crosswalk.",
         code=int_pedestrian("Town05", "i.is4Way or i.is3Way", "LEFT_TURN", "right",
                             ped_speed=1.5, threshold=30, safety=(15, 20), crash=4),
         checker=_checker(LEFT, termination=("TerminateWhen", "TimeLimit")),
         comments=["The ego vehicle should make a left turn at the intersection.",
                   "Make sure the pedestrian crosses in front of the ego car."]),
    dict(id="x03_tee_straight_adv_left", split="test", map="town_tee3",
         desc="Ego vehicle goes straight at 3-way intersection and must suddenly "
              "stop to avoid collision when adversary vehicle makes a left turn.",
         code=int_vehicle("Town07", "i.is3Way", "STRAIGHT", "LEFT_TURN",
                          style="maneuver_first", safety=(14, 22), crash=4,
                          adv_speed=(6, 8)),
         checker=_checker(STRAIGHT),
         comments=["The adversary vehicle should turn left across the ego "
                   "vehicle's path."]),
    dict(id="x04_right_turn_ped_near", split="test", map="town_cross4",
         desc="Ego vehicle turns right at a 4-way intersection while a "
              "pedestrian crosses the road it is turning into.",
         code=int_pedestrian("Town05", "i.is4Way", "RIGHT_TURN", "right",
                             ped_speed=1.5, threshold=30, safety=(15, 20), crash=4),
         checker=_checker(RIGHT, termination=("TerminateWhen", "TimeLimit")),
         comments=["The ego vehicle should turn right at the intersection."]),
    dict(id="x05_highway_follow_brake", split="test", map="town_straight",
         desc="Ego vehicle follows a slow vehicle on a highway and must brake "
              "to avoid tailgating it.",
         code=hw_leader("Town04", "slow", lead_speed=(2, 4)),
         checker=_checker({"braked": "ego"}, moved=40),
         comments=["The lead vehicle should be slower than the ego vehicle."]),
    dict(id="x06_left_turn_adv_lateral", split="test", map="town_cross4",
         desc="Ego vehicle turns left at a 4-way intersection while a vehicle "
              "from a lateral lane drives straight through.",
         code=int_vehicle("Town05", "i.is4Way", "LEFT_TURN", "STRAIGHT",
                          style="maneuver_first", term=75, safety=(15, 25),
                          crash=4, adv_speed=(6, 8)),
         checker=_checker(LEFT),
         comments=["The ego vehicle should turn left at the intersection."]),
    dict(id="x07_straight_adv_right_merge", split="test", map="town_cross4",
         desc="Ego vehicle goes straight through a 4-way intersection while an "
              "adversary vehicle turns right into the same exit road.",
         code=int_vehicle("Town05", "i.is4Way", "STRAIGHT", "RIGHT_TURN",
                          adv_init=(12, 18)),
         checker=_checker(STRAIGHT),
         comments=["The ego vehicle should continue straight through the "
                   "intersection."]),
    dict(id="x08_highway_stopped_queue", split="test", map="town_straight",
         desc="Ego vehicle encounters a stopped vehicle in its highway lane and "
              "must come to a complete stop behind it.",
         code=hw_leader("Town04", "slow", lead_speed=None),
         checker=_checker({"braked": "ego"},
                          termination=("TimeLimit",), moved=3),
         comments=["The vehicle ahead should be stationary."]),
    dict(id="x09_tee_left_adv_straight", split="test", map="town_tee3",
         desc="Ego vehicle turns left from the side road of a T-junction while "
              "main-road traffic continues straight.",
         code=int_vehicle("Town07", "i.is3Way", "LEFT_TURN", "STRAIGHT",
                          style="maneuver_first", safety=(15, 25), crash=4,
                          adv_speed=(6, 8)),
         checker=_checker(LEFT),
         comments=["The ego vehicle should turn left onto the main road."]),
    dict(id="x10_highway_ped_ahead", split="test", map="town_straight",
         desc="A pedestrian starts crossing the highway ahead of the ego "
              "vehicle, which must brake until the lane is clear.",
         code=hw_pedestrian("Town04", "slow"),
         checker=_checker({"braked": "ego"},
                          termination=("TerminateWhen", "TimeLimit"), moved=20),
         comments=["The pedestrian should cross in front of the ego vehicle."]),
    dict(id="x11_straight_ped_crossing", split="test", map="town_cross4",
         desc="Ego vehicle drives straight through a 4-way intersection while a "
              "pedestrian crosses at the junction.",
         code=int_pedestrian("Town05", "i.is4Way", "STRAIGHT", "right",
                             ped_speed=1.5, threshold=30, safety=(15, 20), crash=4, term=60),
         checker=_checker(STRAIGHT, termination=("TerminateWhen", "TimeLimit")),
         comments=["The ego vehicle should continue straight."]),
    dict(id="x12_tee_right_turn_ped", split="test", map="town_tee3",
         desc="Ego vehicle turns right at a T-junction while a pedestrian "
              "crosses its approach road.",
         code=int_pedestrian("Town07", "i.is3Way", "RIGHT_TURN", "right",
                             ped_speed=1.5),
         checker=_checker(RIGHT, termination=("TerminateWhen", "TimeLimit")),
         comments=["The pedestrian should cross the road the ego vehicle "
                   "approaches on."]),
    dict(id="x13_left_turn_ped_left_side", split="test", map="town_cross4",
         desc="Ego vehicle turns left at an intersection while a pedestrian "
              "crosses from the left side of its approach road.",
         code=int_pedestrian("Town05", "i.is4Way", "LEFT_TURN", "left",
                             ped_speed=1.5, threshold=30, safety=(15, 20), crash=4),
         checker=_checker(LEFT, termination=("TerminateWhen", "TimeLimit")),
         comments=["The pedestrian should start from the left side of the road."]),
    dict(id="x14_tee_straight_adv_right", split="test", map="town_tee3",
         desc="Ego vehicle drives along the main road of a T-junction while an "
              "adversary vehicle turns right from the side road into its lane.",
         code=int_vehicle("Town07", "i.is3Way", "STRAIGHT", "RIGHT_TURN",
                          adv_init=(12, 18)),
         checker=_checker(STRAIGHT),
         comments=["The adversary should enter from the side road."]),
    dict(id="x15_highway_ped_shoulder", split="test", map="town_straight",
         desc="A pedestrian steps out from in front of a car parked on the "
              "highway shoulder and crosses toward the road as the ego vehicle "
              "approaches.",
         code=hw_pedestrian("Town04", "slow", side="left", offset=3, parked=True),
         checker=_checker({"braked": "ego"},
                          termination=("TerminateWhen", "TimeLimit"), moved=20),
         comments=["There should be a parked car on the shoulder."]),
    dict(id="x16_right_turn_fast_adv", split="test", map="town_cross4",
         desc="Ego vehicle turns right at a 4-way intersection while a fast "
              "adversary vehicle approaches on the crossing road.",
         code=int_vehicle("Town05", "i.is4Way", "RIGHT_TURN", "STRAIGHT",
                          adv_speed=(9, 12), safety=(15, 22), crash=4),
         checker=_checker(RIGHT),
         comments=["The adversary vehicle should be faster than the ego."]),
]

TURN1_SEEDS = [100, 101, 102]
TURN2_SEEDS = [200, 201, 202]


def validate_scenario(entry: dict) -> list:
    source = f'"""\n{entry["desc"]}\n"""\n' + entry["code"]
    program = parse(source)
    diagnostics = validate(program)
    assert not diagnostics, (entry["id"], [d.render() for d in diagnostics])
    network = load_network(resolve_map_path(entry["map"]))
    traces = []
    for seed in TURN1_SEEDS + TURN2_SEEDS:
        scene = sample_scene(program, network, seed)
        traces.append(run_scene(scene, network, program))
    if entry.get("checker"):
        checker = TraceChecker(entry["checker"])
        failures = checker.check_all(traces[:3])
        assert not failures, (entry["id"], failures)
    return traces


def main() -> None:
    (OUT / "train").mkdir(parents=True, exist_ok=True)
    (OUT / "test").mkdir(parents=True, exist_ok=True)
    manifest_entries = []
    sizes = []
    for entry in SCENARIOS:
        traces = validate_scenario(entry)
        terminations = sorted({t.termination.kind for t in traces})
        source = f'"""\n{entry["desc"]}\n"""\n' + entry["code"]
        path = OUT / entry["split"] / f"{entry['id']}.scenic"
        path.write_text(source, "utf-8")
        from scenloop.dsl import preprocess_training
        sizes.append(heuristic4(entry["desc"]) + heuristic4(
            f"```scenic\n{preprocess_training(source)}```"))
        record = {"id": entry["id"], "split": entry["split"],
                  "file": f"{entry['split']}/{entry['id']}.scenic",
                  "map": entry["map"]}
        if entry.get("checker"):
            record["checker"] = entry["checker"]
        if entry.get("comments"):
            record["comments"] = list(entry["comments"])
        manifest_entries.append(record)
        print(f"{entry['id']}: ok (terminations: {', '.join(terminations)}, "
              f"{sizes[-1]} tokens)")

    average = round(sum(sizes) / len(sizes), 1)
    stats = {"examples": len(sizes), "average_tokens_heuristic4": average,
             "min_tokens": min(sizes), "max_tokens": max(sizes)}
    note = None
    if not 384 <= average <= 640:
        note = ("average example size under the heuristic4 counter is "
                f"{average} tokens, outside +/-25% of the 512-token figure "
                "(that figure is tokenizer-specific)")
        stats["deviation_note"] = note
    import yaml
    manifest = {"stats": stats, "scenarios": manifest_entries}
    (OUT / "manifest.yaml").write_text(
        yaml.safe_dump(manifest, sort_keys=False, width=100), "utf-8")
    print(f"\naverage example tokens: {average}"
          + (f"\nNOTE: {note}" if note else ""))
    print(f"wrote {len(SCENARIOS)} scenarios to {OUT}")


if __name__ == "__main__":
    main()
