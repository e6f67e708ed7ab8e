"""Chat-completion clients: an OpenAI-compatible HTTP client and a scripted mock.

The mock replays responses from a JSONL fixture keyed by sentence id and
attempt number, which keeps the whole augmentation loop runnable and
deterministic without network access.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from .errors import TransportError


@dataclass
class LlmRequest:
    model: str
    user: str
    system: str | None = None
    temperature: float = 0.7
    max_tokens: int | None = None
    json_response: bool = False
    # Caller-side correlation id (the sentence being augmented); used by the
    # mock client for fixture matching and never sent over the wire.
    ref: str | None = None

    def __post_init__(self):
        if not self.user:
            raise ValueError("request user message must be non-empty")


@dataclass
class LlmResponse:
    text: str
    finish_reason: str = "stop"
    prompt_tokens: int = 0
    completion_tokens: int = 0


class ChatClient(Protocol):
    def complete(self, request: LlmRequest) -> LlmResponse:
        ...


class OpenAIChatClient:
    """POSTs to ``{base_url}/chat/completions`` and reads the first choice.

    The API key is taken from an environment variable, never from config
    files or flags.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "NERPIPE_API_KEY",
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._session = session

    def complete(self, request: LlmRequest) -> LlmResponse:
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.user})
        payload = {
            "model": request.model or self.model,
            "messages": messages,
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        if request.json_response:
            payload["response_format"] = {"type": "json_object"}
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        poster = self._session.post if self._session else requests.post
        try:
            resp = poster(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
        except requests.RequestException as exc:
            raise TransportError(f"chat completion failed: {exc}") from exc
        except ValueError as exc:
            raise TransportError(f"chat completion returned non-JSON body: {exc}") from exc
        try:
            choice = body["choices"][0]
            usage = body.get("usage", {})
            return LlmResponse(
                text=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
                prompt_tokens=usage.get("prompt_tokens", 0),
                completion_tokens=usage.get("completion_tokens", 0),
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected chat completion shape: {exc}") from exc


class MockChatClient:
    """Replays scripted responses from {match, attempt, body} fixture entries.

    ``match`` is the request ref (sentence id) or ``"*"`` for any; ``attempt``
    is 1-based and optional (an entry without it matches any attempt). The
    body may be a raw string or a JSON value that is serialized verbatim.
    Attempts are counted per ref, so the client is safe under the
    orchestrator's thread pool.
    """

    def __init__(self, entries: list[dict]):
        self._responses: dict[tuple[str, int | None], str] = {}
        for entry in entries:
            body = entry["body"]
            text = body if isinstance(body, str) else json.dumps(body, ensure_ascii=False)
            attempt = entry.get("attempt")
            key = (str(entry.get("match", "*")), int(attempt) if attempt else None)
            self._responses[key] = text
        self._attempts: dict[str, int] = {}
        self._lock = threading.Lock()
        self.calls: list[tuple[str, int, float]] = []

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "MockChatClient":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(json.loads(line))
        return cls(entries)

    def complete(self, request: LlmRequest) -> LlmResponse:
        ref = request.ref or "*"
        with self._lock:
            attempt = self._attempts.get(ref, 0) + 1
            self._attempts[ref] = attempt
            self.calls.append((ref, attempt, request.temperature))
        for key in ((ref, attempt), (ref, None), ("*", attempt), ("*", None)):
            if key in self._responses:
                return LlmResponse(text=self._responses[key])
        raise TransportError(f"no scripted response for ref={ref!r} attempt={attempt}")


class RemoteEmbedder:
    """OpenAI-compatible embeddings endpoint: POST {input: [...]} -> vectors."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "NERPIPE_API_KEY",
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._session = session

    def embed(self, texts: list[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        poster = self._session.post if self._session else requests.post
        try:
            resp = poster(
                f"{self.base_url}/embeddings",
                json={"model": self.model, "input": texts},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
        except requests.RequestException as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        except ValueError as exc:
            raise TransportError(f"embedding endpoint returned non-JSON: {exc}") from exc
        try:
            data = sorted(body["data"], key=lambda item: item["index"])
            return [item["embedding"] for item in data]
        except (KeyError, TypeError) as exc:
            raise TransportError(f"unexpected embedding response shape: {exc}") from exc
