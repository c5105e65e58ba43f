"""On-disk session state: one directory per session, append-only logs.

Layout:
    sessions/<id>/
        session.json      full state snapshot, written atomically
        prompt.log        current prompt, one {role, content} record per line
        llm.log           completion audit records (gateway.AuditLog)
        events.log        numbered progress events for the UI stream
        turns/<k>/code.scenic
        turns/<k>/diagnostics.txt
        turns/<k>/scenes/<j>.scene
        turns/<k>/scenes/<j>.trace
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from ..prompting import Message, PromptState, prompt_log_lines


class SessionStore:
    def __init__(self, root: str | Path, session_id: str):
        self.root = Path(root)
        self.id = session_id
        self.dir = self.root / session_id

    # --- snapshot ---

    def save_state(self, state: dict) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        tmp = self.dir / "session.json.tmp"
        tmp.write_text(json.dumps(state, indent=2, sort_keys=True), "utf-8")
        os.replace(tmp, self.dir / "session.json")

    def load_state(self) -> dict:
        return json.loads((self.dir / "session.json").read_text("utf-8"))

    def exists(self) -> bool:
        return (self.dir / "session.json").exists()

    # --- prompt transcript ---

    def save_prompt(self, prompt: PromptState) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        text = "\n".join(prompt_log_lines(prompt)) + "\n"
        (self.dir / "prompt.log").write_text(text, "utf-8")

    def prompt_records(self) -> list[dict]:
        path = self.dir / "prompt.log"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text("utf-8").splitlines()
                if line.strip()]

    # --- turn artifacts ---

    def turn_dir(self, turn: int) -> Path:
        return self.dir / "turns" / str(turn)

    def write_code(self, turn: int, code: str) -> None:
        d = self.turn_dir(turn)
        d.mkdir(parents=True, exist_ok=True)
        (d / "code.scenic").write_text(code, "utf-8")

    def read_code(self, turn: int) -> str:
        return (self.turn_dir(turn) / "code.scenic").read_text("utf-8")

    def append_diagnostics(self, turn: int, text: str) -> None:
        d = self.turn_dir(turn)
        d.mkdir(parents=True, exist_ok=True)
        with (d / "diagnostics.txt").open("a", encoding="utf-8") as fh:
            fh.write(text.rstrip("\n") + "\n")

    def read_diagnostics(self, turn: int) -> str:
        path = self.turn_dir(turn) / "diagnostics.txt"
        return path.read_text("utf-8") if path.exists() else ""

    def write_scene(self, turn: int, index: int, scene_text: str, trace_text: str) -> None:
        d = self.turn_dir(turn) / "scenes"
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{index}.scene").write_text(scene_text, "utf-8")
        (d / f"{index}.trace").write_text(trace_text, "utf-8")

    def read_trace(self, turn: int, index: int) -> str:
        return (self.turn_dir(turn) / "scenes" / f"{index}.trace").read_text("utf-8")

    def write_summary(self, summary: dict) -> None:
        (self.dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True), "utf-8")

    # --- events ---

    @property
    def events_path(self) -> Path:
        return self.dir / "events.log"

    def append_event(self, seq: int, event: str, data: dict) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        with self.events_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"seq": seq, "event": event, "data": data},
                                sort_keys=True) + "\n")

    def events(self, after: int = 0) -> list[dict]:
        if not self.events_path.exists():
            return []
        out = []
        for line in self.events_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["seq"] > after:
                out.append(rec)
        return out

    @property
    def llm_log_path(self) -> Path:
        return self.dir / "llm.log"


def serialize_prompt(prompt: PromptState) -> dict:
    return {
        "system": {"role": prompt.system.role, "content": prompt.system.content},
        "pairs": [[{"role": u.role, "content": u.content},
                   {"role": a.role, "content": a.content}] for u, a in prompt.pairs],
        "tail": [{"role": m.role, "content": m.content} for m in prompt.tail],
        "budget": prompt.budget,
        "counter": prompt.counter,
    }


def deserialize_prompt(raw: dict) -> PromptState:
    return PromptState(
        system=Message(**raw["system"]),
        pairs=tuple((Message(**u), Message(**a)) for u, a in raw["pairs"]),
        tail=tuple(Message(**m) for m in raw["tail"]),
        budget=raw["budget"],
        counter=raw["counter"],
    )
