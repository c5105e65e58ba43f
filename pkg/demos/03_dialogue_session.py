#!/usr/bin/env python3
"""Walkthrough: the full dialogue loop against a scripted model.

The scripted backend replays the two classic right-turn programs: the first
works but allows near-misses; after the user comment the safety range rises
and the nearest approach grows. No network access involved.

Run from the repo root:  python3 demos/03_dialogue_session.py
"""

import tempfile
from pathlib import Path

from scenloop.config import WorkbenchConfig
from scenloop.gateway import ScriptedBackend, wrap_in_scenic_fence
from scenloop.session import Orchestrator
from scenloop.sim import trace_from_text

reference = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "reference"
v1 = reference.joinpath("right_turn_adv_straight_v1.scenic").read_text()
v2 = reference.joinpath("right_turn_adv_straight_v2.scenic").read_text()
responses = ["Here is the scenario:\n\n" + wrap_in_scenic_fence(v1.rstrip()),
             "Increased the safety range:\n\n" + wrap_in_scenic_fence(v2.rstrip())]

workdir = tempfile.mkdtemp(prefix="scenloop-demo-")
config = WorkbenchConfig(backend="scripted", sessions_root=f"{workdir}/sessions")
orch = Orchestrator(config,
                    backend_factory=lambda spec, sid: ScriptedBackend(list(responses)))

description = ("Ego vehicle makes a right turn at 4-way intersection while "
               "adversary vehicle from lateral lane goes straight.")
print(f"user: {description}\n")
session = orch.start_session(description, session_id="demo")
store = orch.store("demo")


def show_turn(turn: int) -> None:
    distances = []
    for j in range(config.seeds):
        trace = trace_from_text(store.read_trace(turn, j))
        distances.append(trace.min_pairwise_distance("ego", "adversary"))
    print(f"turn {turn}: state={session.state}, "
          f"queries={session.queries_per_turn()[turn - 1]}")
    print(f"  nearest ego-adversary approach per scene: "
          f"{[round(d, 1) for d in distances]} m")


show_turn(1)
print("\nuser: Comment: Use a higher safety distance\n")
session = orch.user_comment("demo", "Use a higher safety distance")
show_turn(2)

changed = [
    (a, b) for a, b in zip(store.read_code(1).splitlines(),
                           store.read_code(2).splitlines()) if a != b]
print(f"\ncode diff between turns ({len(changed)} line):")
for a, b in changed:
    print(f"  - {a}\n  + {b}")

session = orch.accept("demo")
print(f"\naccepted -> {session.state}; artifacts in {workdir}/sessions/demo/")
