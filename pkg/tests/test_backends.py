import json

import httpx
import pytest

from chattox.classify import Context, HttpBackend, MockBackend, RecordingBackend, ReplayBackend, Stage
from chattox.classify import render_prompt, send_with_retry
from chattox.errors import BackendHttpError, BackendUnavailable, QuotaExceeded, ReplayMiss

from conftest import stream


@pytest.fixture
def payload():
    _, msgs = stream("1", [(0, "hello world")])
    return render_prompt(msgs[0], Context(), Stage.BINARY)


def test_mock_by_digest(payload):
    b = MockBackend({payload.digest(): "yes"})
    assert b.send(payload) == "yes"
    assert b.requests == [payload]


def test_http_request_shape(payload, monkeypatch):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json={"choices": [{"message": {"content": "No"}}]})

    monkeypatch.setenv("BACKEND_API_KEY", "sekrit")
    b = HttpBackend("http://model/v1/chat/completions", "phi4", transport=httpx.MockTransport(handler))
    assert b.send(payload) == "No"
    assert seen["body"]["model"] == "phi4" and seen["body"]["temperature"] == 0.0
    assert [m["role"] for m in seen["body"]["messages"]] == ["system", "user"]
    assert seen["auth"] == "Bearer sekrit"
    assert b.backend_id == "http:phi4"


@pytest.mark.parametrize("status, exc", [(429, QuotaExceeded), (500, BackendHttpError)])
def test_http_errors(payload, status, exc):
    b = HttpBackend("http://m", "x", transport=httpx.MockTransport(lambda r: httpx.Response(status, text="no")))
    with pytest.raises(exc):
        b.send(payload)


def test_unreachable_endpoint_gives_up_after_retries(payload):
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    delays = []
    b = HttpBackend("http://127.0.0.1:9", "x", transport=httpx.MockTransport(handler))
    with pytest.raises(BackendUnavailable):
        send_with_retry(b, payload, max_retries=3, base_delay=1.0, sleep=delays.append)
    assert delays == [1.0, 2.0, 4.0]


def test_retry_recovers(payload):
    calls = iter([QuotaExceeded("slow down", status=429), "yes"])

    def script(p):
        x = next(calls)
        if isinstance(x, Exception):
            raise x
        return x

    delays = []
    assert send_with_retry(MockBackend(script), payload, sleep=delays.append) == "yes"
    assert delays == [1.0]


def test_replay_and_recording(payload, tmp_path):
    log = tmp_path / "replay.jsonl"
    rec = RecordingBackend(MockBackend(lambda p: "Yes"), log)
    assert rec.send(payload) == "Yes"
    rec.send(payload)
    assert len(log.read_text().splitlines()) == 1
    assert ReplayBackend(log).send(payload) == "Yes"


def test_replay_miss_is_distinct_and_not_retried(payload, tmp_path):
    log = tmp_path / "empty.jsonl"
    log.write_text("")
    delays = []
    with pytest.raises(ReplayMiss):
        send_with_retry(ReplayBackend(log), payload, sleep=delays.append)
    assert delays == []
