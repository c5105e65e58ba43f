"""Kinematic scene executor: behavior VM, builtin behaviors, traces."""

from .behaviors import TerminateScene, VMError, make_behavior_runner
from .simulator import AgentState, SimConfig, run_scene
from .trace import (COLLISION, TERMINATE_STATEMENT, TERMINATE_WHEN, TIME_LIMIT,
                    AgentSnap, Event, Snapshot, Termination, Trace,
                    trace_from_text, trace_to_text)

__all__ = [
    "run_scene", "SimConfig", "AgentState", "Trace", "Snapshot", "AgentSnap",
    "Event", "Termination", "trace_to_text", "trace_from_text",
    "TERMINATE_STATEMENT", "TERMINATE_WHEN", "TIME_LIMIT", "COLLISION",
    "TerminateScene", "VMError", "make_behavior_runner",
]
