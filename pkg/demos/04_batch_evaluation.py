#!/usr/bin/env python3
"""Walkthrough: batch evaluation with scripted models and automatic judges.

Runs the bundled 16-scenario test split against the scripted response pack
in evalpack/scripts and prints the cumulative success curves.

Run from the repo root:  python3 demos/04_batch_evaluation.py
"""

import tempfile
from pathlib import Path

from scenloop.config import WorkbenchConfig, default_corpus_dir
from scenloop.corpus import load_corpus
from scenloop.evalharness import (cumulative_success_by_queries,
                                  cumulative_success_by_turn, emit_report,
                                  run_batch)

repo = Path(__file__).resolve().parents[1]
corpus = load_corpus(default_corpus_dir())
workdir = tempfile.mkdtemp(prefix="scenloop-eval-")
config = WorkbenchConfig(backend=f"scriptdir:{repo / 'evalpack' / 'scripts'}",
                         sessions_root=f"{workdir}/sessions")

print(f"running {len(corpus.split('test'))} scripted sessions...")
records = run_batch(corpus, config, workers=4)
for r in records:
    mark = f"turn {r.success_turn}" if r.outcome == "success" else "failed"
    print(f"  {r.scenario_id:32s} {mark:8s} queries/turn: "
          f"{'/'.join(map(str, r.queries_per_turn))}")

by_turn = cumulative_success_by_turn(records)
by_queries = cumulative_success_by_queries(records)
print(f"\ncumulative success by turn:    {[round(v, 4) for v in by_turn]}")
print(f"cumulative success by queries: {[round(v, 4) for v in by_queries[:5]]} ...")
paths = emit_report(records, f"{workdir}/report")
print(f"\nreports written to {workdir}/report/")
