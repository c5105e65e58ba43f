"""Traces: time-stamped simulation histories (see docs/trace-format.md)."""

from __future__ import annotations

import json
from dataclasses import dataclass

TRACE_FORMAT = 1

TERMINATE_STATEMENT = "TerminateStatement"
TERMINATE_WHEN = "TerminateWhen"
TIME_LIMIT = "TimeLimit"
COLLISION = "Collision"


@dataclass(frozen=True)
class AgentSnap:
    name: str
    x: float
    y: float
    heading: float
    speed: float
    throttle: float
    brake: float


@dataclass(frozen=True)
class Snapshot:
    t: float
    agents: tuple[AgentSnap, ...]

    def agent(self, name: str) -> AgentSnap:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # interrupt_enter | interrupt_exit | action | collision | behavior_done
    agent: str
    detail: str


@dataclass(frozen=True)
class Termination:
    kind: str  # TerminateStatement | TerminateWhen | TimeLimit | Collision
    t: float
    index: int | None = None  # terminate-when clause index
    agent: str | None = None  # terminating agent / first collision partner


@dataclass(frozen=True)
class Trace:
    map_name: str
    dt: float
    snapshots: tuple[Snapshot, ...]
    events: tuple[Event, ...]
    termination: Termination

    @property
    def duration(self) -> float:
        return self.termination.t

    def agent_names(self) -> list[str]:
        return [a.name for a in self.snapshots[0].agents]

    def min_pairwise_distance(self, a: str, b: str) -> float:
        import math
        best = math.inf
        for snap in self.snapshots:
            pa, pb = snap.agent(a), snap.agent(b)
            best = min(best, math.hypot(pa.x - pb.x, pa.y - pb.y))
        return best


def trace_to_text(trace: Trace) -> str:
    records: list[dict] = [{
        "record": "trace", "format": TRACE_FORMAT, "map": trace.map_name,
        "dt": trace.dt,
    }]
    for s in trace.snapshots:
        records.append({
            "record": "snapshot", "t": s.t,
            "agents": [[a.name, a.x, a.y, a.heading, a.speed, a.throttle, a.brake]
                       for a in s.agents],
        })
    for e in trace.events:
        records.append({"record": "event", "t": e.t, "kind": e.kind,
                        "agent": e.agent, "detail": e.detail})
    records.append({
        "record": "termination", "kind": trace.termination.kind,
        "t": trace.termination.t, "index": trace.termination.index,
        "agent": trace.termination.agent,
    })
    return "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"


def trace_from_text(text: str) -> Trace:
    header = None
    snapshots: list[Snapshot] = []
    events: list[Event] = []
    termination = None
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec["record"]
        if kind == "trace":
            header = rec
        elif kind == "snapshot":
            snapshots.append(Snapshot(rec["t"], tuple(
                AgentSnap(*a) for a in rec["agents"])))
        elif kind == "event":
            events.append(Event(rec["t"], rec["kind"], rec["agent"], rec["detail"]))
        elif kind == "termination":
            termination = Termination(rec["kind"], rec["t"], rec["index"], rec["agent"])
    if header is None or termination is None:
        raise ValueError("not a trace file: missing header or termination record")
    return Trace(header["map"], header["dt"], tuple(snapshots), tuple(events), termination)
