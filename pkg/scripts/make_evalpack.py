#!/usr/bin/env python3
"""Generate the scripted-backend evaluation pack under evalpack/scripts/.

Run from the repo root:  python3 scripts/make_evalpack.py

One response script per test scenario, arranged so a batch over the bundled
corpus reproduces the reference outcome pattern:

  - 5 scenarios succeed at turn 1 with 1 query  (gold code first try)
  - 1 scenario succeeds at turn 1 with 2 queries (syntax error, then gold)
  - 2 scenarios succeed at turn 2 with 1+1 queries (wrong maneuver, judged
    down, fixed after the scripted comment)
  - 8 scenarios fail (checker never satisfied, unknown identifiers,
    extraction failures, or unsatisfiable constraints)

Cumulative success: by turn [6/16, 8/16, ...] and by total queries
[5/16, 8/16, ...].
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scenloop.config import default_corpus_dir
from scenloop.corpus import load_corpus
from scenloop.dsl import preprocess_training
from scenloop.gateway import SCRIPT_DELIMITER, wrap_in_scenic_fence

OUT = Path(__file__).resolve().parents[1] / "evalpack" / "scripts"

# how the fake LLM behaves per scenario
PLAN = {
    # turn 1, gold immediately (5 scenarios, 1 query each)
    "x03_tee_straight_adv_left": "gold",
    "x04_right_turn_ped_near": "gold",
    "x05_highway_follow_brake": "gold",
    "x06_left_turn_adv_lateral": "gold",
    "x07_straight_adv_right_merge": "gold",
    # turn 1, 2 queries: a syntax error repaired automatically
    "x08_highway_stopped_queue": "syntax_then_gold",
    # turn 2: wrong maneuver judged down, fixed after the comment
    "x01_right_turn_adv_straight": "wrong_turn_then_gold",
    "x02_left_turn_ped_crosswalk": "wrong_turn_then_gold",
    # failures
    "x09_tee_left_adv_straight": "wrong_turn_forever",   # checker never passes
    "x10_highway_ped_ahead": "never_brakes",
    "x11_straight_ped_crossing": "wrong_turn_forever",
    "x12_tee_right_turn_ped": "wrong_turn_forever",
    "x13_left_turn_ped_left_side": "unknown_identifiers",
    "x14_tee_straight_adv_right": "no_code_blocks",
    "x15_highway_ped_shoulder": "unsatisfiable",
    "x16_right_turn_fast_adv": "unsatisfiable",
}

_FLIP = {"RIGHT_TURN": "LEFT_TURN", "LEFT_TURN": "RIGHT_TURN",
         "STRAIGHT": "RIGHT_TURN"}


def gold_response(entry) -> str:
    code = preprocess_training(entry.code)
    return "Here is the scenario:\n\n" + wrap_in_scenic_fence(code.rstrip("\n"))


def wrong_turn_response(entry) -> str:
    """The ego maneuver type flipped: executable, but semantically wrong."""
    code = preprocess_training(entry.code)
    target = next(t for t in _FLIP
                  if f"lambda m: m.type is ManeuverType.{t}" in code)
    flipped = code.replace(f"lambda m: m.type is ManeuverType.{target}",
                           f"lambda m: m.type is ManeuverType.{_FLIP[target]}", 1)
    assert flipped != code, entry.id
    return "Here is the scenario:\n\n" + wrap_in_scenic_fence(flipped.rstrip("\n"))


def wrong_braking_response(entry) -> str:
    """Executable but never brakes: the ego ignores everything."""
    code = preprocess_training(entry.code)
    needle = "    interrupt when withinDistanceToAnyObjs(self, globalParameters.SAFETY_DIST)"
    flipped = "\n".join(
        line.replace("globalParameters.SAFETY_DIST", "0.1")
        if line.startswith(needle) else line
        for line in code.splitlines())
    assert flipped != code, entry.id
    return "Here is the scenario:\n\n" + wrap_in_scenic_fence(flipped.rstrip("\n"))


def syntax_error_response(entry) -> str:
    code = preprocess_training(entry.code)
    broken = code.replace("behaviour EgoBehavior(trajectory):",
                          "behaviour EgoBehavior(trajectory:", 1)
    return "Here is the scenario:\n\n" + wrap_in_scenic_fence(broken.rstrip("\n"))


def unknown_identifier_response(entry) -> str:
    code = preprocess_training(entry.code)
    broken = code.replace("FollowTrajectoryBehavior(", "FolowTrajectoryBehavior(", 1)
    return "Here is the scenario:\n\n" + wrap_in_scenic_fence(broken.rstrip("\n"))


def unsatisfiable_response(entry) -> str:
    code = preprocess_training(entry.code)
    lines = code.rstrip("\n").splitlines()
    term = lines.pop()  # terminate when ... stays last
    lines.append("require 1 > 2")
    lines.append(term)
    return ("This version pins the geometry precisely:\n\n"
            + wrap_in_scenic_fence("\n".join(lines)))


def build_script(entry, plan: str) -> str:
    if plan == "gold":
        responses = [gold_response(entry)]
    elif plan == "syntax_then_gold":
        responses = [syntax_error_response(entry), gold_response(entry)]
    elif plan == "wrong_turn_then_gold":
        responses = [wrong_turn_response(entry), gold_response(entry)]
    elif plan == "wrong_turn_forever":
        # one executable-but-wrong answer per turn, five turns
        responses = [wrong_turn_response(entry)] * 5
    elif plan == "never_brakes":
        responses = [wrong_braking_response(entry)] * 5
    elif plan == "unknown_identifiers":
        # never learns the right name: 5 queries x 2 turns
        responses = [unknown_identifier_response(entry)] * 10
    elif plan == "no_code_blocks":
        responses = ["I cannot write this scenario, sorry."] * 10
    elif plan == "unsatisfiable":
        responses = [unsatisfiable_response(entry)] * 10
    else:
        raise ValueError(plan)
    return ("\n" + SCRIPT_DELIMITER + "\n").join(responses) + "\n"


def _verify(entry, plan: str) -> None:
    """The flawed-but-executable variants must sample at the fixture seeds
    and fail their checkers there, or the batch outcome pattern drifts."""
    from scenloop.config import resolve_map_path
    from scenloop.dsl import parse, postprocess_generated, validate
    from scenloop.evalharness import TraceChecker
    from scenloop.gateway import extract_code
    from scenloop.roads import load_network
    from scenloop.sampler import sample_scene
    from scenloop.sim import run_scene

    makers = {"wrong_turn_then_gold": wrong_turn_response,
              "wrong_turn_forever": wrong_turn_response,
              "never_brakes": wrong_braking_response}
    if plan not in makers:
        return
    network = load_network(resolve_map_path(entry.map))
    code = postprocess_generated(extract_code(makers[plan](entry)), entry.description)
    program = parse(code)
    assert not validate(program, network.dsl_symbols()), entry.id
    checker = TraceChecker(entry.checker)
    seed_sets = [(100, 101, 102)]
    if plan in ("wrong_turn_forever", "never_brakes"):
        seed_sets.append((200, 201, 202))
    for seeds in seed_sets:
        traces = [run_scene(sample_scene(program, network, s), network, program)
                  for s in seeds]
        failures = checker.check_all(traces)
        assert failures, (entry.id, "flawed variant unexpectedly passed its checker")


def main() -> None:
    corpus = load_corpus(default_corpus_dir())
    OUT.mkdir(parents=True, exist_ok=True)
    for entry in corpus.split("test"):
        plan = PLAN[entry.id]
        _verify(entry, plan)
        (OUT / f"{entry.id}.txt").write_text(build_script(entry, plan), "utf-8")
        print(f"{entry.id}: {plan}")
    print(f"wrote {len(PLAN)} scripts to {OUT}")


if __name__ == "__main__":
    main()
