import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from scenloop.gateway import (AuditLog, CompletionRequest, ExtractionError,
                              HttpBackend, ReplayBackend, ScriptExhausted,
                              ScriptedBackend, TransportError, complete,
                              extract_code, load_script, parse_script,
                              record_cost, wrap_in_scenic_fence)


def _request(user="hello"):
    return CompletionRequest(messages=(
        {"role": "system", "content": "sys"},
        {"role": "user", "content": user},
    ))


def test_scripted_backend_exhaustion():
    backend = ScriptedBackend(["one", "two"])
    assert backend.complete(_request()).text == "one"
    assert backend.complete(_request()).text == "two"
    with pytest.raises(ScriptExhausted):
        backend.complete(_request())


def test_scripted_backend_matcher():
    from scenloop.gateway import ScriptMismatch
    backend = ScriptedBackend(["ok"], matchers=[lambda m: "magic" in m])
    with pytest.raises(ScriptMismatch):
        backend.complete(_request("no"))
    backend.cursor = 0
    assert backend.complete(_request("magic word")).text == "ok"


def test_script_file_parsing(tmp_path):
    text = "first response\nwith two lines\n---\n```scenic\ncode\n```\n---\nthird\n"
    path = tmp_path / "script.txt"
    path.write_text(text)
    backend = load_script(path)
    assert backend.responses == ["first response\nwith two lines",
                                 "```scenic\ncode\n```", "third"]


def test_parse_script_ignores_blank_chunks():
    assert parse_script("a\n---\n\n---\nb\n") == ["a", "b"]


class _StubHandler(BaseHTTPRequestHandler):
    body = {"choices": [{"message": {"content": "stub reply"}}],
            "usage": {"total_tokens": 42}}
    status_sequence: list[int] = []
    seen: list[dict] = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        self.seen.append(json.loads(self.rfile.read(length)))
        status = self.status_sequence.pop(0) if self.status_sequence else 200
        payload = json.dumps(self.body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.status_sequence = []
    _StubHandler.seen = []
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


def test_http_backend_round_trip(stub_server, tmp_path):
    backend = HttpBackend(endpoint=stub_server, api_key="k", model="m")
    audit = AuditLog(tmp_path / "llm.log", clock=lambda: 0.0)
    result = complete(_request(), backend, audit)
    assert result.text == "stub reply"
    assert result.usage == {"total_tokens": 42}
    records = audit.records()
    assert len(records) == 1
    assert records[0]["status"] == "ok"
    sent = _StubHandler.seen[0]
    assert sent["temperature"] == 0.1
    assert sent["max_tokens"] == 1400
    assert sent["messages"][0]["role"] == "system"


def test_http_backend_retries_5xx_then_succeeds(stub_server):
    _StubHandler.status_sequence = [500, 429]
    sleeps = []
    backend = HttpBackend(endpoint=stub_server, sleeper=sleeps.append)
    assert backend.complete(_request()).text == "stub reply"
    assert len(_StubHandler.seen) == 3
    assert sleeps == [0.5, 1.0]


def test_http_backend_gives_up_after_three_attempts(stub_server):
    _StubHandler.status_sequence = [500, 500, 500]
    backend = HttpBackend(endpoint=stub_server, sleeper=lambda s: None)
    with pytest.raises(TransportError):
        backend.complete(_request())
    assert len(_StubHandler.seen) == 3


def test_http_backend_no_retry_on_4xx(stub_server):
    _StubHandler.status_sequence = [404]
    backend = HttpBackend(endpoint=stub_server, sleeper=lambda s: None)
    with pytest.raises(TransportError):
        backend.complete(_request())
    assert len(_StubHandler.seen) == 1


def test_failed_calls_still_audit_one_record(tmp_path):
    audit = AuditLog(tmp_path / "llm.log", clock=lambda: 1.0)
    backend = ScriptedBackend([])
    with pytest.raises(ScriptExhausted):
        complete(_request(), backend, audit)
    records = audit.records()
    assert len(records) == 1
    assert records[0]["status"] == "error"


def test_replay_backend_hits_without_network(tmp_path, stub_server):
    backend = HttpBackend(endpoint=stub_server)
    replay = ReplayBackend(tmp_path / "cache", fallback=backend)
    first = replay.complete(_request())
    assert len(_StubHandler.seen) == 1
    second = replay.complete(_request())
    assert len(_StubHandler.seen) == 1  # zero further network calls
    assert first == second
    replay_only = ReplayBackend(tmp_path / "cache")
    assert replay_only.complete(_request()).text == "stub reply"
    with pytest.raises(TransportError):
        replay_only.complete(_request("different"))


def test_request_invariants():
    with pytest.raises(ValueError):
        CompletionRequest(messages=(), temperature=0.1)
    with pytest.raises(ValueError):
        CompletionRequest(messages=({"role": "user", "content": "x"},))
    with pytest.raises(ValueError):
        _request().__class__(messages=_request().messages, temperature=-1)


def test_extract_code_prefers_scenic_tag():
    response = "Some prose.\n```python\nnope\n```\nmore\n```scenic\nyes = 1\n```\n"
    assert extract_code(response) == "yes = 1"


def test_extract_code_falls_back_to_any_fence():
    response = "```python\nfallback = 2\n```"
    assert extract_code(response) == "fallback = 2"


def test_extract_code_errors_on_prose():
    with pytest.raises(ExtractionError) as exc:
        extract_code("no fences here")
    assert "no code block found" in str(exc.value)


def test_extract_roundtrip_property():
    import random
    rng = random.Random(0)
    for _ in range(100):
        lines = ["".join(rng.choices("abcdef ", k=rng.randrange(0, 30)))
                 for _ in range(rng.randrange(1, 6))]
        code = "\n".join(lines).rstrip()
        assert extract_code(wrap_in_scenic_fence(code)) == code
        assert "```" not in extract_code(wrap_in_scenic_fence(code))


def test_record_cost_empty_and_sums():
    assert record_cost([]) == {"total_tokens": 0, "total_cost": 0.0, "sessions": {}}
    records = [
        {"session": "a", "model": "m", "usage": {"total_tokens": 1000}},
        {"session": "a", "model": "m", "usage": {"total_tokens": 2000}},
    ]
    report = record_cost(records, {"m": 0.01})
    assert report["total_tokens"] == 3000
    assert report["total_cost"] == 0.03
    assert report["sessions"]["a"]["calls"] == 2


def test_record_cost_per_session_breakdown_sums_to_total():
    import random
    rng = random.Random(1)
    records = []
    for i in range(16):
        for _ in range(rng.randrange(1, 6)):
            records.append({"session": f"s{i}", "model": "m",
                            "usage": {"total_tokens": rng.randrange(100, 2000)}})
    report = record_cost(records, {"m": 0.03})
    assert sum(s["tokens"] for s in report["sessions"].values()) == report["total_tokens"]
    assert report["total_cost"] == pytest.approx(
        sum(s["cost"] for s in report["sessions"].values()), abs=1e-6)
    # scripted backends report no usage: zero cost
    assert record_cost([{"session": "x", "model": "m", "usage": None}])["total_tokens"] == 0
