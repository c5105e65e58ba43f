"""Transport to chat-completion backends, plus code extraction.

Three interchangeable backends: an HTTP client for OpenAI-compatible
endpoints, a scripted backend replaying canned responses (deterministic
tests), and a replay cache keyed by request hash. Every completion attempt
appends exactly one record to the session audit log, failures included.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import httpx

DEFAULT_TEMPERATURE = 0.1
DEFAULT_MAX_RESPONSE_TOKENS = 1400

ENV_ENDPOINT = "LLM_ENDPOINT"
ENV_API_KEY = "LLM_API_KEY"
ENV_MODEL = "LLM_MODEL"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class ScriptExhausted(GatewayError):
    pass


class ScriptMismatch(GatewayError):
    pass


class ExtractionError(GatewayError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[dict, ...]  # serialized wire messages; first is system
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_RESPONSE_TOKENS
    model: str = "gpt-4-0314"

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not self.messages or self.messages[0].get("role") != "system":
            raise ValueError("messages must be non-empty and start with a system message")

    def last_user_content(self) -> str:
        for m in reversed(self.messages):
            if m.get("role") == "user":
                return m.get("content", "")
        return ""

    def digest(self) -> str:
        payload = json.dumps(
            {"model": self.model, "temperature": self.temperature,
             "messages": list(self.messages)},
            sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    text: str
    usage: dict | None = None  # {"prompt_tokens":..,"completion_tokens":..,"total_tokens":..}


class AuditLog:
    """Append-only JSONL log of completion attempts."""

    def __init__(self, path: str | Path, clock: Callable[[], float] = time.time):
        self.path = Path(path)
        self.clock = clock

    def append(self, record: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        record = {"ts": round(self.clock(), 3), **record}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        return [json.loads(line) for line in self.path.read_text("utf-8").splitlines()
                if line.strip()]


class HttpBackend:
    """OpenAI-compatible chat completions over HTTP.

    Retries up to 3 attempts with exponential backoff, but only for
    timeouts, 5xx and 429; other failures surface immediately.
    """

    MAX_ATTEMPTS = 3

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, timeout: float = 120.0,
                 sleeper: Callable[[float], None] = time.sleep):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT, "")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.timeout = timeout
        self.sleeper = sleeper
        if not self.endpoint:
            raise TransportError(f"no endpoint configured (set {ENV_ENDPOINT})")

    def complete(self, request: CompletionRequest) -> CompletionResult:
        payload = {
            "model": self.model or request.model,
            "messages": list(request.messages),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            if attempt:
                self.sleeper(0.5 * 2 ** (attempt - 1))
            try:
                response = httpx.post(self.endpoint, json=payload, headers=headers,
                                      timeout=self.timeout)
            except httpx.TimeoutException as exc:
                last_error = TransportError(f"request timed out: {exc}")
                continue
            except httpx.HTTPError as exc:
                raise TransportError(f"transport failure: {exc}") from exc
            if response.status_code == 429 or response.status_code >= 500:
                last_error = TransportError(
                    f"server returned HTTP {response.status_code}")
                continue
            if response.status_code != 200:
                raise TransportError(f"server returned HTTP {response.status_code}")
            try:
                body = response.json()
                choice = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed response body: {exc}") from exc
            return CompletionResult(choice, body.get("usage"))
        raise last_error if last_error else TransportError("request failed")


@dataclass
class ScriptedBackend:
    """Returns canned responses in order; optional per-response matchers
    are predicates on the last user message."""

    responses: list[str]
    matchers: list[Callable[[str], bool] | None] = field(default_factory=list)
    cursor: int = 0

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if self.cursor >= len(self.responses):
            raise ScriptExhausted(
                f"script has only {len(self.responses)} responses")
        matcher = self.matchers[self.cursor] if self.cursor < len(self.matchers) else None
        if matcher is not None and not matcher(request.last_user_content()):
            raise ScriptMismatch(
                f"response {self.cursor} matcher rejected the last user message")
        text = self.responses[self.cursor]
        self.cursor += 1
        return CompletionResult(text, None)


SCRIPT_DELIMITER = "---"


def parse_script(text: str) -> list[str]:
    """Split a script file into responses on bare ``---`` delimiter lines."""
    responses: list[list[str]] = [[]]
    for line in text.splitlines():
        if line.strip() == SCRIPT_DELIMITER:
            responses.append([])
        else:
            responses[-1].append(line)
    return ["\n".join(chunk).strip("\n") for chunk in responses
            if "\n".join(chunk).strip()]


def load_script(path: str | Path) -> ScriptedBackend:
    return ScriptedBackend(parse_script(Path(path).read_text("utf-8")))


class ReplayBackend:
    """Cache of responses keyed by request hash.

    On hit, returns the recorded response with no network call. On miss,
    delegates to the fallback (recording the result) or fails.
    """

    def __init__(self, cache_dir: str | Path, fallback=None):
        self.cache_dir = Path(cache_dir)
        self.fallback = fallback

    def _path(self, request: CompletionRequest) -> Path:
        return self.cache_dir / f"{request.digest()}.json"

    def complete(self, request: CompletionRequest) -> CompletionResult:
        path = self._path(request)
        if path.exists():
            raw = json.loads(path.read_text("utf-8"))
            return CompletionResult(raw["text"], raw.get("usage"))
        if self.fallback is None:
            raise TransportError(
                f"no recorded response for request {request.digest()[:12]}")
        result = self.fallback.complete(request)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"text": result.text, "usage": result.usage},
                                   sort_keys=True), "utf-8")
        return result


def complete(request: CompletionRequest, backend, audit: AuditLog | None = None
             ) -> CompletionResult:
    """Run one completion, writing exactly one audit record either way."""
    record = {"request": request.digest(), "model": request.model,
              "backend": type(backend).__name__}
    try:
        result = backend.complete(request)
    except GatewayError as exc:
        if audit is not None:
            audit.append({**record, "status": "error", "error": str(exc)})
        raise
    if audit is not None:
        audit.append({**record, "status": "ok", "response_chars": len(result.text),
                      "usage": result.usage})
    return result


_FENCE_RE = re.compile(r"```[ \t]*(\w*)[ \t]*\n(.*?)```", re.DOTALL)


def extract_code(response: str) -> str:
    """The first fenced block tagged ``scenic``, else the first fenced block
    of any tag; fence lines removed, trailing whitespace stripped."""
    blocks = _FENCE_RE.findall(response)
    if not blocks:
        raise ExtractionError("no code block found")
    for tag, body in blocks:
        if tag == "scenic":
            return body.rstrip()
    return blocks[0][1].rstrip()


def wrap_in_scenic_fence(code: str) -> str:
    return f"```scenic\n{code}\n```"


def record_cost(records: list[dict], price_per_1k: dict[str, float] | None = None
                ) -> dict:
    """Aggregate token usage and cost from audit records."""
    price_per_1k = price_per_1k or {}
    by_session: dict[str, dict] = {}
    total_tokens = 0
    total_cost = 0.0
    for rec in records:
        usage = rec.get("usage") or {}
        tokens = usage.get("total_tokens", 0)
        model = rec.get("model", "")
        cost = tokens / 1000.0 * price_per_1k.get(model, 0.0)
        session = rec.get("session", "")
        entry = by_session.setdefault(session, {"tokens": 0, "cost": 0.0, "calls": 0})
        entry["tokens"] += tokens
        entry["cost"] = round(entry["cost"] + cost, 6)
        entry["calls"] += 1
        total_tokens += tokens
        total_cost += cost
    return {"total_tokens": total_tokens, "total_cost": round(total_cost, 6),
            "sessions": by_session}
