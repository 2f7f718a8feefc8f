"""Append-only evolution event log.

Every stage of a turn (requirement, decision, generation, validation,
integration, invocation, response) is recorded as one newline-delimited
JSON event. The log is the audit substrate: reuse-vs-rebuild behaviour,
integration ordering and turn atomicity are all assertable from it.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

EVENT_KINDS = frozenset(
    {
        "requirement_received",
        "decision",
        "generation_started",
        "candidates_produced",
        "validation_report",
        "integration",
        "invocation",
        "response",
        "failure",
        "llm_exchange",
    }
)


@dataclass(frozen=True)
class EvolutionEvent:
    seq: int
    timestamp: str
    session_id: str
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp": self.timestamp,
                "session_id": self.session_id,
                "kind": self.kind,
                "payload": self.payload,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "EvolutionEvent":
        raw = json.loads(line)
        return cls(
            seq=raw["seq"],
            timestamp=raw["timestamp"],
            session_id=raw["session_id"],
            kind=raw["kind"],
            payload=raw.get("payload", {}),
        )


@dataclass
class EventLog:
    """Durable, strictly ordered event sink backed by an ndjson file.

    Events are flushed to disk on every append; a reply is never delivered
    before its events hit the file. Existing events are loaded on open so a
    reopened session continues the sequence instead of restarting it.
    """

    path: Path
    _events: list[EvolutionEvent] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _cond: threading.Condition = field(init=False)
    _listeners: list[Callable[[EvolutionEvent], None]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.path = Path(self.path)
        self._cond = threading.Condition(self._lock)
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._events.append(EvolutionEvent.from_json(line))
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._events[-1].seq if self._events else 0

    def append(self, session_id: str, kind: str, payload: dict) -> EvolutionEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {kind}")
        with self._lock:
            seq = self._events[-1].seq + 1 if self._events else 1
            event = EvolutionEvent(
                seq=seq,
                timestamp=datetime.now(timezone.utc).isoformat(),
                session_id=session_id,
                kind=kind,
                payload=payload,
            )
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(event.to_json() + "\n")
                fh.flush()
            self._events.append(event)
            listeners = list(self._listeners)
            self._cond.notify_all()
        for cb in listeners:
            cb(event)
        return event

    def events(self, after: int = 0, session_id: str | None = None) -> list[EvolutionEvent]:
        with self._lock:
            picked = [e for e in self._events if e.seq > after]
        if session_id is not None:
            picked = [e for e in picked if e.session_id == session_id]
        return picked

    def wait_for(
        self, after: int, timeout: float, session_id: str | None = None
    ) -> list[EvolutionEvent]:
        """Long-poll helper: block until an event past `after` arrives."""
        deadline = time.monotonic() + timeout
        while True:
            found = self.events(after=after, session_id=session_id)
            if found:
                return found
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return []
            with self._cond:
                self._cond.wait(timeout=remaining)

    def add_listener(self, callback: Callable[[EvolutionEvent], None]) -> None:
        with self._lock:
            self._listeners.append(callback)
