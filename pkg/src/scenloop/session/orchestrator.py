"""The dialogue workflow as an explicit state machine.

One session = one scenario description steered across up to 5 turns. Each
turn runs the automatic repair loop: query the model, extract and compile
the code, sample and simulate scenes; compile/sample errors go back to the
model verbatim (prefixed "An error has occurred: ") for up to 5 queries.
The user then comments ("Comment: ..."), accepts, or gives up.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from random import Random

from ..config import (WorkbenchConfig, default_corpus_dir, resolve_map_path,
                      system_template)
from ..corpus import Corpus, load_corpus
from ..diagnostics import SourceError, render_all
from ..dsl import parse, postprocess_generated, validate
from ..gateway import (AuditLog, CompletionRequest, ExtractionError, GatewayError,
                       HttpBackend, ReplayBackend, ScriptedBackend, TransportError,
                       complete, extract_code, load_script)
from ..prompting import (PromptState, append_feedback, build_initial_prompt,
                         count_tokens, serialize_messages)
from ..roads import load_network
from ..sampler import RejectionExhausted, sample_scene, scene_to_text
from ..sim import SimConfig, run_scene, trace_to_text
from .store import SessionStore, deserialize_prompt, serialize_prompt

GENERATING = "Generating"
AWAITING_USER = "AwaitingUser"
NEEDS_USER_HELP = "NeedsUserHelp"
SUCCEEDED = "Succeeded"
FAILED = "Failed"

TERMINAL = (SUCCEEDED, FAILED)

FEEDBACK_TOKEN_CAP = 1000


class SessionError(Exception):
    pass


class InvalidState(SessionError):
    pass


class TurnsExhausted(SessionError):
    pass


@dataclass
class TurnOutcome:
    turn: int
    executable: bool
    queries: int = 0
    code: str | None = None
    seeds: list[int] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    transport_error: str | None = None
    canceled: bool = False

    def to_dict(self) -> dict:
        return {
            "turn": self.turn, "executable": self.executable, "queries": self.queries,
            "seeds": self.seeds, "errors": self.errors,
            "transport_error": self.transport_error, "canceled": self.canceled,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TurnOutcome":
        return cls(raw["turn"], raw["executable"], raw["queries"], None,
                   raw["seeds"], raw["errors"], raw["transport_error"], raw["canceled"])


@dataclass
class DialogueSession:
    id: str
    description: str
    prompt: PromptState
    state: str
    config: WorkbenchConfig
    turn: int = 0
    turns: list[TurnOutcome] = field(default_factory=list)
    event_seq: int = 0

    def queries_per_turn(self) -> list[int]:
        return [t.queries for t in self.turns]

    def total_queries(self) -> int:
        return sum(t.queries for t in self.turns)


def _make_backend(spec: str, scenario_id: str | None = None):
    if spec == "http":
        return HttpBackend()
    if spec.startswith("script:"):
        return load_script(spec[len("script:"):])
    if spec.startswith("scriptdir:"):
        directory = spec[len("scriptdir:"):]
        if scenario_id is None:
            raise SessionError("scriptdir backend needs a scenario id")
        return load_script(f"{directory}/{scenario_id}.txt")
    if spec.startswith("replay:"):
        rest = spec[len("replay:"):]
        if rest.endswith(":record"):
            return ReplayBackend(rest[:-len(":record")], fallback=HttpBackend())
        return ReplayBackend(rest)
    raise SessionError(f"unknown backend spec {spec!r}")


class Orchestrator:
    """Hosts sessions against one corpus, map and backend configuration."""

    def __init__(self, config: WorkbenchConfig, corpus: Corpus | None = None,
                 backend_factory=None, clock=time.time):
        self.config = config
        self.corpus = corpus or load_corpus(config.corpus or default_corpus_dir())
        self.network = load_network(resolve_map_path(config.map))
        self.sim_config = SimConfig()
        self.clock = clock
        self._backend_factory = backend_factory or _make_backend
        self._backends: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._cancels: dict[str, threading.Event] = {}
        self._listeners: dict[str, threading.Condition] = {}
        self.progress_hook = None  # callable(session_id, event, data) for tests

    # --- persistence ---

    def store(self, session_id: str) -> SessionStore:
        return SessionStore(self.config.sessions_root, session_id)

    def _lock(self, session_id: str) -> threading.Lock:
        return self._locks.setdefault(session_id, threading.Lock())

    def cancel_event(self, session_id: str) -> threading.Event:
        return self._cancels.setdefault(session_id, threading.Event())

    def listener(self, session_id: str) -> threading.Condition:
        return self._listeners.setdefault(session_id, threading.Condition())

    def _save(self, session: DialogueSession) -> None:
        store = self.store(session.id)
        store.save_state({
            "id": session.id,
            "description": session.description,
            "state": session.state,
            "turn": session.turn,
            "turns": [t.to_dict() for t in session.turns],
            "event_seq": session.event_seq,
            "prompt": serialize_prompt(session.prompt),
            "config": session.config.to_dict(),
            "updated": round(self.clock(), 3),
        })
        store.save_prompt(session.prompt)

    def load(self, session_id: str) -> DialogueSession:
        store = self.store(session_id)
        if not store.exists():
            raise SessionError(f"no session {session_id!r}")
        raw = store.load_state()
        return DialogueSession(
            id=raw["id"], description=raw["description"],
            prompt=deserialize_prompt(raw["prompt"]), state=raw["state"],
            config=WorkbenchConfig(**raw["config"]), turn=raw["turn"],
            turns=[TurnOutcome.from_dict(t) for t in raw["turns"]],
            event_seq=raw["event_seq"])

    def list_sessions(self) -> list[str]:
        root = self.store("x").root
        if not root.exists():
            return []
        return sorted(p.name for p in root.iterdir() if (p / "session.json").exists())

    def _emit(self, session: DialogueSession, event: str, data: dict) -> None:
        session.event_seq += 1
        self.store(session.id).append_event(session.event_seq, event,
                                            {"state": session.state, **data})
        if self.progress_hook is not None:
            self.progress_hook(session.id, event, data)
        cond = self.listener(session.id)
        with cond:
            cond.notify_all()

    # --- backend management ---

    def _backend(self, session: DialogueSession):
        backend = self._backends.get(session.id)
        if backend is None:
            backend = self._backend_factory(session.config.backend, session.id)
            # resume a scripted backend where the audit log left off
            if isinstance(backend, ScriptedBackend):
                backend.cursor = len(AuditLog(self.store(session.id).llm_log_path).records())
            self._backends[session.id] = backend
        return backend

    # --- public operations ---

    def start_session(self, description: str, session_id: str | None = None
                      ) -> DialogueSession:
        if not description.strip():
            raise SessionError("description must be non-empty")
        session_id = session_id or uuid.uuid4().hex[:12]
        config = self.config
        prompt = build_initial_prompt(
            self.corpus.training_examples(), description,
            Random(config.shuffle_seed), config.budget, system_template(),
            config.counter)
        session = DialogueSession(session_id, description, prompt, GENERATING, config)
        with self._lock(session_id):
            self._save(session)
            self._emit(session, "state_changed", {})
            self._run_turn(session)
        return session

    def user_comment(self, session_id: str, text: str) -> DialogueSession:
        with self._lock(session_id):
            session = self.load(session_id)
            if session.state in TERMINAL:
                raise InvalidState(f"session is {session.state}; no further turns")
            if session.state == GENERATING:
                raise InvalidState("a turn is already running")
            if session.turn >= session.config.max_turns:
                session.state = FAILED
                self._save(session)
                self._emit(session, "state_changed", {"reason": "turns exhausted"})
                raise TurnsExhausted(
                    f"all {session.config.max_turns} turns are used; session failed")
            session.prompt = append_feedback(session.prompt, "comment", text)
            session.state = GENERATING
            self._save(session)
            self._emit(session, "state_changed", {})
            self._run_turn(session)
            return session

    def accept(self, session_id: str) -> DialogueSession:
        with self._lock(session_id):
            session = self.load(session_id)
            if session.state != AWAITING_USER:
                raise InvalidState(
                    f"only an AwaitingUser session can be accepted, not {session.state}")
            session.state = SUCCEEDED
            self._save(session)
            self.store(session_id).write_summary({
                "outcome": "success",
                "success_turn": session.turn,
                "total_queries": session.total_queries(),
                "queries_per_turn": session.queries_per_turn(),
                "final_code": f"turns/{session.turn}/code.scenic",
            })
            self._emit(session, "state_changed", {})
            return session

    def cancel(self, session_id: str) -> None:
        session = self.load(session_id)
        if session.state in TERMINAL:
            raise InvalidState(f"session is already {session.state}")
        self.cancel_event(session_id).set()

    # --- the repair loop ---

    def seeds_for_turn(self, config: WorkbenchConfig, turn: int) -> list[int]:
        return [config.base_seed + 100 * turn + j for j in range(config.seeds)]

    def _run_turn(self, session: DialogueSession) -> TurnOutcome:
        config = session.config
        session.turn += 1
        outcome = TurnOutcome(turn=session.turn, executable=False)
        session.turns.append(outcome)
        backend = self._backend(session)
        audit = AuditLog(self.store(session.id).llm_log_path, clock=self.clock)
        cancel = self.cancel_event(session.id)
        cancel.clear()
        store = self.store(session.id)

        while outcome.queries < config.max_queries:
            if cancel.is_set():
                outcome.canceled = True
                break
            outcome.queries += 1
            self._save(session)
            self._emit(session, "query_started",
                       {"turn": session.turn, "query": outcome.queries})
            request = CompletionRequest(
                messages=tuple(serialize_messages(session.prompt,
                                                  config.example_encoding)),
                temperature=config.temperature,
                max_tokens=config.max_response_tokens,
                model=config.model)
            try:
                result = complete(request, backend, audit)
            except TransportError as exc:
                outcome.transport_error = str(exc)
                store.append_diagnostics(session.turn, f"transport: {exc}")
                self._emit(session, "query_finished",
                           {"turn": session.turn, "query": outcome.queries,
                            "ok": False, "transport": True})
                break
            except GatewayError as exc:
                outcome.transport_error = str(exc)
                store.append_diagnostics(session.turn, f"backend: {exc}")
                self._emit(session, "query_finished",
                           {"turn": session.turn, "query": outcome.queries,
                            "ok": False, "transport": True})
                break
            session.prompt = append_feedback(session.prompt, "assistant", result.text)
            self._save(session)

            error_text = self._compile_and_simulate(session, outcome, result.text, store)
            if error_text is None:
                session.state = AWAITING_USER
                self._save(session)
                self._emit(session, "query_finished",
                           {"turn": session.turn, "query": outcome.queries, "ok": True})
                self._emit(session, "state_changed", {})
                return outcome
            outcome.errors.append(error_text)
            store.append_diagnostics(session.turn, error_text)
            self._emit(session, "diagnostics",
                       {"turn": session.turn, "query": outcome.queries,
                        "text": error_text})
            capped = _cap_tokens(error_text, FEEDBACK_TOKEN_CAP, config.counter)
            session.prompt = append_feedback(session.prompt, "error", capped)
            self._save(session)
            self._emit(session, "query_finished",
                       {"turn": session.turn, "query": outcome.queries, "ok": False})

        session.state = NEEDS_USER_HELP
        self._save(session)
        self._emit(session, "state_changed", {})
        return outcome

    def _compile_and_simulate(self, session: DialogueSession, outcome: TurnOutcome,
                              response_text: str, store: SessionStore) -> str | None:
        """One compile-sample-simulate pass; the error text to feed back, or
        None when the turn produced an executable scenario."""
        config = session.config
        try:
            code = extract_code(response_text)
        except ExtractionError as exc:
            return f"ExtractionError: {exc}"
        try:
            processed = postprocess_generated(code, session.description)
            program = parse(processed)
            diagnostics = validate(program, self.network.dsl_symbols())
            if diagnostics:
                raise SourceError(diagnostics)
        except SourceError as exc:
            return render_all(exc.diagnostics)

        seeds = self.seeds_for_turn(config, session.turn)
        scenes = []
        try:
            for seed in seeds:
                scenes.append((seed, sample_scene(program, self.network, seed)))
        except RejectionExhausted as exc:
            return f"RejectionExhausted: {exc}"
        except SourceError as exc:
            return render_all(exc.diagnostics)

        traces = []
        try:
            for seed, scene in scenes:
                traces.append((seed, scene, run_scene(scene, self.network, program,
                                                      self.sim_config)))
        except SourceError as exc:
            return render_all(exc.diagnostics)

        store.write_code(session.turn, processed)
        outcome.code = processed
        outcome.seeds = seeds
        for index, (seed, scene, trace) in enumerate(traces):
            store.write_scene(session.turn, index, scene_to_text(scene),
                              trace_to_text(trace))
            self._emit(session, "scene_ready",
                       {"turn": session.turn, "scene": index, "seed": seed,
                        "termination": trace.termination.kind,
                        "duration": trace.duration})
        outcome.executable = True
        return None


def _cap_tokens(text: str, cap: int, counter: str) -> str:
    if count_tokens(text, counter) <= cap:
        return text
    # heuristic4 is ceil(bytes/4); cut to the byte budget on a char boundary
    encoded = text.encode("utf-8")[:cap * 4]
    return encoded.decode("utf-8", errors="ignore")
