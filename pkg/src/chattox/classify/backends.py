"""Chat-completion backends: HTTP client, scripted mock, and replay log."""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

from ..errors import (
    BackendError,
    BackendHttpError,
    BackendTimeout,
    BackendUnavailable,
    QuotaExceeded,
    ReplayMiss,
)
from .prompts import PromptPayload

log = logging.getLogger(__name__)

API_KEY_ENV = "BACKEND_API_KEY"


class Backend(Protocol):
    backend_id: str

    def send(self, payload: PromptPayload) -> str: ...


class HttpBackend:
    """Client for an OpenAI-style ``/chat/completions`` endpoint."""

    def __init__(self, url: str, model: str, *, timeout_s: float = 60.0,
                 temperature: float = 0.0, api_key: str | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.url = url
        self.model = model
        self.temperature = temperature
        self.backend_id = f"http:{model}"
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._client = httpx.Client(timeout=timeout_s, headers=headers, transport=transport)

    def request_body(self, payload: PromptPayload) -> dict:
        return {
            "model": self.model,
            "messages": [
                {"role": "system", "content": payload.system_instruction},
                {"role": "user", "content": payload.user_content},
            ],
            "temperature": self.temperature,
        }

    def send(self, payload: PromptPayload) -> str:
        try:
            resp = self._client.post(self.url, json=self.request_body(payload))
        except httpx.TimeoutException as e:
            raise BackendTimeout(f"timeout talking to {self.url}") from e
        except httpx.TransportError as e:
            raise BackendHttpError(f"cannot reach {self.url}: {e}") from e
        if resp.status_code == 429:
            raise QuotaExceeded("rate limited", status=429)
        if resp.status_code >= 400:
            raise BackendHttpError(f"HTTP {resp.status_code}: {resp.text[:200]}", status=resp.status_code)
        try:
            return resp.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise BackendHttpError(f"unexpected response body: {resp.text[:200]}") from e

    def close(self) -> None:
        self._client.close()


class MockBackend:
    """In-process backend scripted by a callable or a lookup table.

    ``script`` is either ``f(payload) -> str`` or a mapping keyed by payload
    digest. Every payload received is kept in ``requests``.
    """

    def __init__(self, script: Callable[[PromptPayload], str] | Mapping[str, str],
                 backend_id: str = "mock"):
        self.script = script
        self.backend_id = backend_id
        self.requests: list[PromptPayload] = []
        self._lock = threading.Lock()

    def send(self, payload: PromptPayload) -> str:
        with self._lock:
            self.requests.append(payload)
        if callable(self.script):
            return self.script(payload)
        return self.script[payload.digest()]


class ReplayBackend:
    """Serves responses from a recorded ``{payload_digest, response}`` JSONL log."""

    def __init__(self, path: str | os.PathLike, backend_id: str = "replay"):
        self.path = Path(path)
        self.backend_id = backend_id
        self.log: dict[str, str] = {}
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                r = json.loads(line)
                self.log[r["payload_digest"]] = r["response"]

    def send(self, payload: PromptPayload) -> str:
        try:
            return self.log[payload.digest()]
        except KeyError:
            raise ReplayMiss(f"no recorded response for payload {payload.digest()}") from None


class RecordingBackend:
    """Wraps a backend and appends every exchange to a replay log."""

    def __init__(self, inner: Backend, path: str | os.PathLike):
        self.inner = inner
        self.backend_id = inner.backend_id
        self.path = Path(path)
        self._seen: set[str] = set()
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._seen.add(json.loads(line)["payload_digest"])
        self._lock = threading.Lock()

    def send(self, payload: PromptPayload) -> str:
        out = self.inner.send(payload)
        d = payload.digest()
        with self._lock:
            if d not in self._seen:
                self._seen.add(d)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(json.dumps({"payload_digest": d, "response": out}, ensure_ascii=False) + "\n")
        return out


def send_with_retry(backend: Backend, payload: PromptPayload, *, max_retries: int = 3,
                    base_delay: float = 1.0, sleep: Callable[[float], None] = time.sleep) -> str:
    """Send with exponential backoff (1s, 2s, 4s, ...) on transient errors."""
    for attempt in range(max_retries + 1):
        try:
            return backend.send(payload)
        except BackendError as e:
            if attempt == max_retries:
                raise BackendUnavailable(
                    f"{backend.backend_id}: giving up after {attempt + 1} attempts: {e}") from e
            delay = base_delay * 2 ** attempt
            log.info("%s: %s; retrying in %.1fs", backend.backend_id, e, delay)
            sleep(delay)
    raise AssertionError("unreachable")
