"""Chat-completion transport with journaling, retries, and offline providers.

This is the only module that performs network I/O.  A provider is anything
with a ``complete(request) -> ChatResponse`` method; ``LLMClient`` wraps one
with validation, retry, latency measurement, and an append-only JSONL
journal.  ``MockProvider`` and ``ReplayProvider`` satisfy the same contract
without touching the network, which keeps the whole pipeline runnable (and
bit-deterministic) offline.
"""
from __future__ import annotations

import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import requests

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 2000
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_BACKOFF_BASE = 0.5
DEFAULT_CONCURRENCY = 4

_ROLES = ("system", "user", "assistant")


class EmptyMessages(ValueError):
    """A request carried no messages; raised before any I/O happens."""


class ProviderError(RuntimeError):
    pass


class AuthError(ProviderError):
    pass


class RateLimited(ProviderError):
    pass


class Timeout(ProviderError):
    """Transport-level failure (timeouts, connection errors)."""


class MalformedProviderResponse(ProviderError):
    pass


class ScriptExhausted(ProviderError):
    """A scripted/replay provider has no response left for this call."""


@dataclass
class ChatRequest:
    messages: list
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    model_name: str = ""

    def validate(self) -> None:
        if not self.messages:
            raise EmptyMessages("request has no messages")
        for message in self.messages:
            if message.get("role") not in _ROLES:
                raise ValueError(f"unknown role {message.get('role')!r}")
        if any(m["role"] == "system" for m in self.messages):
            if self.messages[0]["role"] != "system":
                raise ValueError("system message must come first")

    def as_dict(self) -> dict:
        return {
            "messages": self.messages,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "model_name": self.model_name,
        }

    def key(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, ensure_ascii=False)


@dataclass
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)
    latency: float = 0.0

    def as_dict(self) -> dict:
        return {
            "content": self.content,
            "finish_reason": self.finish_reason,
            "usage": self.usage,
            "latency": self.latency,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChatResponse":
        return cls(
            content=data["content"],
            finish_reason=data.get("finish_reason", "stop"),
            usage=data.get("usage", {}),
            latency=data.get("latency", 0.0),
        )


class DeterministicClock:
    """Monotone fake clock so journals and latencies are reproducible."""

    def __init__(self, start: float = 0.0, step: float = 1.0):
        self._value = start
        self._step = step
        self._lock = threading.Lock()

    def __call__(self) -> float:
        with self._lock:
            value = self._value
            self._value += self._step
            return value


class MockProvider:
    """Returns scripted fixture texts in order; raises when exhausted."""

    def __init__(self, script):
        self._script = deque(script)
        self._lock = threading.Lock()
        self.requests: list = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.requests.append(request)
            if not self._script:
                raise ScriptExhausted(
                    f"mock script exhausted after {len(self.requests) - 1} calls"
                )
            fixture = self._script.popleft()
        if isinstance(fixture, ChatResponse):
            return fixture
        return ChatResponse(content=str(fixture))


def mock_provider(script) -> MockProvider:
    return MockProvider(script)


class ReplayProvider:
    """Serves responses recorded in a journal, keyed by the full request.

    Identical requests recorded more than once replay in recording order.
    A request with no recorded response raises ScriptExhausted.
    """

    def __init__(self, entries):
        self._responses: dict = {}
        for entry in entries:
            request = ChatRequest(**entry["request"])
            queue = self._responses.setdefault(request.key(), deque())
            queue.append(ChatResponse.from_dict(entry["response"]))
        self._lock = threading.Lock()

    @classmethod
    def from_journal(cls, path) -> "ReplayProvider":
        entries = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return cls(entries)

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            queue = self._responses.get(request.key())
            if not queue:
                raise ScriptExhausted("no recorded response for this request")
            return queue.popleft()


class HttpProvider:
    """JSON chat-completion endpoint speaking the prevailing hosted shape.

    The API key is read from the environment variable named by
    ``credential_env`` at call time and never appears in logs, journals,
    or error messages.  Connection-level failures (including actual
    timeouts) surface as Timeout, which the client treats as retryable.
    """

    def __init__(self, endpoint: str, credential_env: str,
                 timeout: float = 60.0, session=None):
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout = timeout
        self._session = session if session is not None else requests

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = os.environ.get(self.credential_env)
        if not key:
            raise AuthError(
                f"credential environment variable {self.credential_env!r} is not set"
            )
        payload = {
            "model": request.model_name,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {key}"}
        try:
            raw = self._session.post(
                self.endpoint, json=payload, headers=headers,
                timeout=self.timeout,
            )
        except requests.exceptions.RequestException as exc:
            raise Timeout(f"transport failure: {type(exc).__name__}") from None
        if raw.status_code in (401, 403):
            raise AuthError(f"authentication rejected (HTTP {raw.status_code})")
        if raw.status_code == 429:
            raise RateLimited("rate limited (HTTP 429)")
        if raw.status_code != 200:
            raise MalformedProviderResponse(f"HTTP {raw.status_code}")
        try:
            data = raw.json()
            choice = data["choices"][0]
            return ChatResponse(
                content=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
                usage=data.get("usage", {}),
            )
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedProviderResponse(
                f"unexpected response shape: {type(exc).__name__}"
            ) from None


class LLMClient:
    """Validation, retry-with-backoff, and journaling around a provider.

    Retries RateLimited and Timeout with exponential backoff up to
    ``max_attempts`` total tries; AuthError, MalformedProviderResponse,
    and ScriptExhausted surface immediately.  Safe for concurrent use up
    to the caller's in-flight cap (journal writes are serialized).
    """

    def __init__(self, provider, journal_path=None,
                 max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                 backoff_base: float = DEFAULT_BACKOFF_BASE,
                 sleep=time.sleep, clock=time.time):
        self.provider = provider
        self.journal_path = Path(journal_path) if journal_path else None
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._clock = clock
        self._journal_lock = threading.Lock()

    def chat(self, request: ChatRequest) -> ChatResponse:
        request.validate()
        attempt = 0
        while True:
            started = self._clock()
            try:
                response = self.provider.complete(request)
            except (RateLimited, Timeout):
                attempt += 1
                if attempt >= self.max_attempts:
                    raise
                self._sleep(self.backoff_base * (2 ** (attempt - 1)))
                continue
            response.latency = self._clock() - started
            self._journal(request, response)
            return response

    def _journal(self, request: ChatRequest, response: ChatResponse) -> None:
        if self.journal_path is None:
            return
        line = json.dumps(
            {
                "request": request.as_dict(),
                "response": response.as_dict(),
                "timestamp": self._clock(),
            },
            ensure_ascii=False,
        )
        with self._journal_lock:
            with open(self.journal_path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")


def run_dialogue(client: LLMClient, rounds, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = DEFAULT_MAX_TOKENS, model_name: str = ""):
    """Send a multi-round dialogue, threading each reply into the next round.

    ``rounds`` is a list of message lists (e.g. from stage1_messages).
    Returns (responses, full transcript including assistant turns).
    """
    transcript: list = []
    responses: list = []
    for round_messages in rounds:
        transcript.extend(round_messages)
        response = client.chat(
            ChatRequest(
                messages=list(transcript),
                temperature=temperature,
                max_tokens=max_tokens,
                model_name=model_name,
            )
        )
        responses.append(response)
        transcript.append({"role": "assistant", "content": response.content})
    return responses, transcript
