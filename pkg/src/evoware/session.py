"""Wiring of the component stack and per-session turn handling.

A Runtime owns one managed root and the shared component stack (event log,
gateway, data manager, sandbox, generator, validator). Sessions are
conversation contexts on top of it; turns are serialized through the
runtime lock so the single-writer discipline of the managed root holds
even when several sessions talk to one HTTP server.
"""

from __future__ import annotations

import os
import threading
import uuid

from .config import RuntimeConfig
from .data_manager import DataManager
from .errors import ConfigError
from .events import EventLog
from .gateway import Gateway, LiveBackend, ReplayBackend, ReplayScript
from .generator import Generator
from .leader import Leader, Requirement
from .validator import Validator


def build_backend(config: RuntimeConfig, script: ReplayScript | None = None):
    if config.backend == "replay":
        if script is None:
            if config.replay_script is None:
                raise ConfigError("replay backend requires a replay script")
            script = ReplayScript.from_file(config.replay_script)
        return ReplayBackend(script)
    api_key = os.environ.get(config.api_key_env, "")
    return LiveBackend(model=config.model, api_key=api_key, base_url=config.api_base_url)


class Runtime:
    def __init__(self, config: RuntimeConfig, script: ReplayScript | None = None):
        self.config = config
        self.data_manager = DataManager(config.managed_root, config=config, create=True)
        self.event_log = EventLog(self.data_manager.events_path)
        self.gateway = Gateway(build_backend(config, script))
        self.sandbox = self.data_manager.sandbox
        self.generator = Generator(self.gateway, config)
        self.validator = Validator(self.gateway, self.sandbox, config)
        self.turn_lock = threading.Lock()
        self.sessions: dict[str, Session] = {}

    def new_session(self, session_id: str | None = None) -> "Session":
        session = Session(self, session_id or uuid.uuid4().hex[:12])
        self.sessions[session.session_id] = session
        return session


class Session:
    def __init__(self, runtime: Runtime, session_id: str):
        self.runtime = runtime
        self.session_id = session_id
        self.turn = 0

        def emit(kind: str, payload: dict) -> None:
            runtime.event_log.append(session_id, kind, payload)

        self._emit = emit
        runtime.gateway.event_sink = self._sink_with_turn
        runtime.data_manager.event_sink = self._sink_with_turn
        self.leader = Leader(
            gateway=runtime.gateway,
            data_manager=runtime.data_manager,
            generator=runtime.generator,
            validator=runtime.validator,
            config=runtime.config,
            emit=self._sink_with_turn,
        )

    def _sink_with_turn(self, kind: str, payload: dict) -> None:
        if "turn" not in payload:
            payload = {**payload, "turn": self.turn}
        self._emit(kind, payload)

    def handle_line(self, text: str) -> str:
        with self.runtime.turn_lock:
            self._claim_components()
            self.turn += 1
            requirement = Requirement(session_id=self.session_id, text=text, turn=self.turn)
            return self.leader.handle_turn(requirement)

    def _claim_components(self) -> None:
        # Shared components report events for whichever session holds the
        # turn lock.
        self.runtime.gateway.event_sink = self._sink_with_turn
        self.runtime.data_manager.event_sink = self._sink_with_turn
