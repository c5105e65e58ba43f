#!/usr/bin/env python3
"""Walkthrough: run scenes through the kinematic simulator and judge traces.

Run from the repo root:  python3 demos/02_simulate_and_judge.py
"""

from scenloop.config import default_corpus_dir, resolve_map_path
from scenloop.corpus import load_corpus
from scenloop.dsl import parse
from scenloop.evalharness import TraceChecker
from scenloop.roads import load_network
from scenloop.sampler import sample_scene
from scenloop.sim import run_scene

corpus = load_corpus(default_corpus_dir())
entry = corpus.entry("x02_left_turn_ped_crosswalk")
print(f"scenario: {entry.id}")
print(f"description: {entry.description}\n")

program = parse(entry.code)
network = load_network(resolve_map_path(entry.map))
checker = TraceChecker(entry.checker)

for seed in (100, 101, 102):
    scene = sample_scene(program, network, seed)
    trace = run_scene(scene, network, program)
    ego_start = trace.snapshots[0].agent("ego")
    ego_end = trace.snapshots[-1].agent("ego")
    braked = sum(1 for s in trace.snapshots if s.agent("ego").brake > 0)
    failures = checker.check_trace(trace)
    print(f"seed {seed}: {trace.termination.kind:14s} after {trace.duration:5.1f}s | "
          f"{braked:3d} braking steps | judge: "
          f"{'pass' if not failures else ', '.join(failures)}")
    print(f"  interrupt events: "
          f"{sum(1 for e in trace.events if e.kind == 'interrupt_enter')} entries")
