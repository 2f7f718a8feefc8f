"""Uniform interface to language-model backends.

Two backends share one contract: a live remote chat API for real use, and
a deterministic replay backend that serves scripted responses for tests
and scenario fixtures. Replay entries are consumed strictly in script
order; an entry never matches twice, so two runs over the same script and
request sequence produce byte-identical responses.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from .errors import BackendUnavailable, ConfigError, ScriptExhausted

AGENT_NAMES = ("leader", "generator", "validator")


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    text: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    agent_name: str
    request_id: str
    temperature_hint: float = 0.2

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("message list must be non-empty")
        if self.messages[-1].role not in ("user", "system"):
            raise ValueError("final message must have role user or system")
        if self.agent_name not in AGENT_NAMES:
            raise ValueError(f"unknown agent: {self.agent_name}")
        if self.temperature_hint < 0:
            raise ValueError("temperature_hint must be >= 0")

    def last_user_text(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.text
        return self.messages[-1].text


@dataclass(frozen=True)
class ChatResponse:
    text: str
    backend_label: str
    usage_note: dict | None = None


@dataclass
class ReplayEntry:
    agent: str
    match: str
    response: str
    consumed: bool = False


@dataclass
class ReplayScript:
    entries: list[ReplayEntry]

    @classmethod
    def from_dicts(cls, raw: list[dict], base_dir: Path | None = None) -> "ReplayScript":
        entries = []
        for item in raw:
            response = item.get("response")
            if response is None and "response_file" in item:
                if base_dir is None:
                    raise ConfigError("response_file entries need a base directory")
                response = (base_dir / item["response_file"]).read_text(encoding="utf-8")
            if response is None:
                raise ConfigError(f"replay entry has no response: {item!r}")
            entries.append(
                ReplayEntry(agent=item["agent"], match=item.get("match", ""), response=response)
            )
        return cls(entries=entries)

    @classmethod
    def from_file(cls, path: Path) -> "ReplayScript":
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            raise ConfigError("replay script must be a JSON array")
        return cls.from_dicts(raw, base_dir=path.parent)


class Backend(Protocol):
    label: str

    def complete(self, request: ChatRequest) -> ChatResponse: ...


class ReplayBackend:
    """Serves the first unconsumed entry whose agent matches the request
    and whose match substring occurs in the final user message."""

    label = "replay"

    def __init__(self, script: ReplayScript):
        self._script = script
        self._lock = threading.Lock()
        self.consumption_order: list[int] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        target = request.last_user_text()
        with self._lock:
            for index, entry in enumerate(self._script.entries):
                if entry.consumed or entry.agent != request.agent_name:
                    continue
                if entry.match in target:
                    entry.consumed = True
                    self.consumption_order.append(index)
                    return ChatResponse(text=entry.response, backend_label=self.label)
        raise ScriptExhausted(
            f"no unconsumed replay entry for agent={request.agent_name}, "
            f"message tail {target[-120:]!r}"
        )


class LiveBackend:
    """Thin OpenAI-style chat completions client with basic retry hygiene."""

    label = "live"

    RETRIES = 2
    BACKOFF_BASE = 1.5

    def __init__(self, model: str, api_key: str, base_url: str):
        if not api_key:
            raise ConfigError("live backend requires an API key")
        self.model = model
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")

    def complete(self, request: ChatRequest) -> ChatResponse:
        import requests

        payload = {
            "model": self.model,
            "temperature": request.temperature_hint,
            "messages": [{"role": m.role, "content": m.text} for m in request.messages],
        }
        last_error: Exception | None = None
        for attempt in range(self.RETRIES + 1):
            try:
                resp = requests.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers={"Authorization": f"Bearer {self.api_key}"},
                    timeout=120,
                )
                if resp.status_code in (429,) or resp.status_code >= 500:
                    raise BackendUnavailable(f"transient status {resp.status_code}")
                resp.raise_for_status()
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
                usage = body.get("usage")
                if not text:
                    raise BackendUnavailable("backend returned empty text")
                return ChatResponse(text=text, backend_label=self.label, usage_note=usage)
            except Exception as exc:  # noqa: BLE001 - edge of the network boundary
                last_error = exc
                if attempt < self.RETRIES:
                    time.sleep(self.BACKOFF_BASE ** attempt)
        raise BackendUnavailable(f"live backend failed after retries: {last_error}")


class Gateway:
    """Validates requests, dispatches to the single configured backend and
    mirrors every exchange into the event sink."""

    def __init__(
        self,
        backend: Backend,
        event_sink: Callable[[str, dict], None] | None = None,
    ):
        self.backend = backend
        self.event_sink = event_sink
        self._seen_ids: set[str] = set()
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            if request.request_id in self._seen_ids:
                raise ValueError(f"duplicate request_id in session: {request.request_id}")
            self._seen_ids.add(request.request_id)
        response = self.backend.complete(request)
        if not response.text:
            raise BackendUnavailable("backend returned empty response text")
        if self.event_sink is not None:
            self.event_sink(
                "llm_exchange",
                {
                    "agent": request.agent_name,
                    "request_id": request.request_id,
                    "prompt_tail": request.last_user_text()[-400:],
                    "response_head": response.text[:400],
                    "backend": response.backend_label,
                },
            )
        return response
