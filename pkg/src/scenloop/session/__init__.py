"""Dialogue sessions: state machine, repair loop, persistence, HTTP service."""

from .orchestrator import (AWAITING_USER, FAILED, GENERATING, NEEDS_USER_HELP,
                           SUCCEEDED, DialogueSession, InvalidState, Orchestrator,
                           SessionError, TurnOutcome, TurnsExhausted)
from .store import SessionStore

__all__ = [
    "Orchestrator", "DialogueSession", "TurnOutcome", "SessionStore",
    "SessionError", "InvalidState", "TurnsExhausted",
    "GENERATING", "AWAITING_USER", "NEEDS_USER_HELP", "SUCCEEDED", "FAILED",
]
