"""HTTP facade over the orchestrator, plus the event stream the UI follows.

Repair loops run in a per-session worker thread; progress events stream out
over server-sent events with sequence numbers, so a client can reconnect
with Last-Event-ID and resume where it left off.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import (HTMLResponse, JSONResponse, PlainTextResponse,
                               StreamingResponse)
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .orchestrator import (GENERATING, InvalidState, Orchestrator, SessionError,
                           TurnsExhausted)


class CreateSession(BaseModel):
    description: str


class Comment(BaseModel):
    text: str


def session_view(orchestrator: Orchestrator, session_id: str) -> dict:
    session = orchestrator.load(session_id)
    store = orchestrator.store(session_id)
    turns = []
    for outcome in session.turns:
        turn = outcome.to_dict()
        code_path = store.turn_dir(outcome.turn) / "code.scenic"
        turn["has_code"] = code_path.exists()
        turn["diagnostics"] = store.read_diagnostics(outcome.turn)
        turn["scenes"] = list(range(len(outcome.seeds)))
        turns.append(turn)
    return {
        "id": session.id,
        "description": session.description,
        "state": session.state,
        "turn": session.turn,
        "max_turns": session.config.max_turns,
        "map": session.config.map,
        "turns": turns,
        "event_seq": session.event_seq,
    }


def create_app(orchestrator: Orchestrator, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="scenloop session service")
    running: dict[str, threading.Thread] = {}

    def _busy(session_id: str) -> bool:
        thread = running.get(session_id)
        return thread is not None and thread.is_alive()

    def _spawn(session_id: str, target) -> None:
        thread = threading.Thread(target=target, daemon=True)
        running[session_id] = thread
        thread.start()

    @app.post("/sessions")
    def create_session(body: CreateSession):
        if not body.description.strip():
            raise HTTPException(422, "description must be non-empty")
        import uuid
        session_id = uuid.uuid4().hex[:12]
        # persist a placeholder immediately so the id can be watched
        def run():
            try:
                orchestrator.start_session(body.description, session_id=session_id)
            except SessionError:
                pass
        _spawn(session_id, run)
        return {"id": session_id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            view = session_view(orchestrator, session_id)
        except SessionError:
            if _busy(session_id):
                return {"id": session_id, "state": GENERATING, "turns": [],
                        "turn": 0, "event_seq": 0}
            raise HTTPException(404, f"no session {session_id}")
        view["busy"] = _busy(session_id)
        return view

    @app.post("/sessions/{session_id}/comment")
    def comment(session_id: str, body: Comment):
        if _busy(session_id):
            raise HTTPException(409, "a turn is already running")
        try:
            session = orchestrator.load(session_id)
        except SessionError:
            raise HTTPException(404, f"no session {session_id}")
        if session.state == GENERATING:
            raise HTTPException(409, "a turn is already running")
        if session.turn >= session.config.max_turns or session.state in ("Succeeded", "Failed"):
            # surface the rejection synchronously (including Failed flip)
            try:
                orchestrator.user_comment(session_id, body.text)
            except (TurnsExhausted, InvalidState) as exc:
                raise HTTPException(409, str(exc))
        def run():
            try:
                orchestrator.user_comment(session_id, body.text)
            except SessionError:
                pass
        _spawn(session_id, run)
        return {"ok": True}

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str):
        try:
            session = orchestrator.accept(session_id)
        except InvalidState as exc:
            raise HTTPException(409, str(exc))
        except SessionError:
            raise HTTPException(404, f"no session {session_id}")
        return {"ok": True, "state": session.state}

    @app.post("/sessions/{session_id}/cancel")
    def cancel(session_id: str):
        try:
            orchestrator.cancel(session_id)
        except InvalidState as exc:
            raise HTTPException(409, str(exc))
        except SessionError:
            raise HTTPException(404, f"no session {session_id}")
        return {"ok": True}

    @app.get("/sessions/{session_id}/turns/{turn}/code")
    def turn_code(session_id: str, turn: int):
        path = orchestrator.store(session_id).turn_dir(turn) / "code.scenic"
        if not path.exists():
            raise HTTPException(404, "no code for that turn")
        return PlainTextResponse(path.read_text("utf-8"))

    @app.get("/sessions/{session_id}/turns/{turn}/scenes/{scene}/trace")
    def scene_trace(session_id: str, turn: int, scene: int):
        path = (orchestrator.store(session_id).turn_dir(turn)
                / "scenes" / f"{scene}.trace")
        if not path.exists():
            raise HTTPException(404, "no trace for that scene")
        return PlainTextResponse(path.read_text("utf-8"))

    @app.get("/map")
    def map_document():
        from ..config import resolve_map_path
        return PlainTextResponse(
            resolve_map_path(orchestrator.config.map).read_text("utf-8"))

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, request: Request, after: int = 0,
               idle_timeout: float = 120.0):
        last_id = request.headers.get("Last-Event-ID")
        start_after = int(last_id) if last_id else after
        store = orchestrator.store(session_id)
        cond = orchestrator.listener(session_id)

        def stream():
            import json as _json
            cursor = start_after
            idle = 0.0
            while True:
                batch = store.events(after=cursor)
                for event in batch:
                    cursor = event["seq"]
                    yield (f"id: {event['seq']}\n"
                           f"event: {event['event']}\n"
                           f"data: {_json.dumps(event['data'])}\n\n")
                if batch:
                    idle = 0.0
                else:
                    idle += 0.25
                    if idle >= idle_timeout:
                        return
                    with cond:
                        cond.wait(timeout=0.25)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/ui/", response_class=HTMLResponse)
        def ui_placeholder():
            return HTMLResponse(
                "<html><body><p>UI assets not built. Run `npm run build` in "
                "frontend/ and restart with --ui-dir.</p></body></html>")

    @app.exception_handler(SessionError)
    def on_session_error(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=409)

    return app
