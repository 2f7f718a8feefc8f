"""HTTP facade over the runtime for the web console.

POST /api/sessions                        -> {"session_id"}
POST /api/sessions/{id}/messages {text}   -> {"reply"}
GET  /api/sessions/{id}/events?after=N[&wait=S] -> {"events": [...]}
GET  /api/tree                            -> tree JSON
GET  /api/validations/{event_seq}         -> full validation report payload

Turn semantics are identical to the REPL: turns run on the shared runtime
under its lock, a failed turn is still a 200 with a failure reply, and only
infrastructure breakage maps to 5xx.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .session import Runtime

MAX_LONG_POLL_SECS = 25.0

_SESSION_EVENTS = re.compile(r"^/api/sessions/([^/]+)/events$")
_SESSION_MESSAGES = re.compile(r"^/api/sessions/([^/]+)/messages$")
_VALIDATION = re.compile(r"^/api/validations/(\d+)$")


class RuntimeHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, runtime: Runtime, host: str = "127.0.0.1", port: int | None = None):
        self.runtime = runtime
        super().__init__((host, port if port is not None else runtime.config.http_port), Handler)

    def serve_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


class Handler(BaseHTTPRequestHandler):
    server: RuntimeHTTPServer

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        pass  # request logging stays out of stdout; the event log is the record

    # -- plumbing ---------------------------------------------------------

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", "0") or "0")
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError:
            return {}
        return parsed if isinstance(parsed, dict) else {}

    # -- routes ------------------------------------------------------------

    def do_POST(self) -> None:  # noqa: N802 - stdlib naming
        runtime = self.server.runtime
        parsed = urlparse(self.path)
        if parsed.path == "/api/sessions":
            session = runtime.new_session()
            self._send(200, {"session_id": session.session_id})
            return
        match = _SESSION_MESSAGES.match(parsed.path)
        if match:
            session = runtime.sessions.get(match.group(1))
            if session is None:
                self._send(404, {"error": "unknown session"})
                return
            body = self._read_body()
            text = body.get("text", "")
            if not isinstance(text, str) or not text.strip():
                self._send(400, {"error": "text required"})
                return
            try:
                reply = session.handle_line(text)
            except Exception as exc:  # infrastructure failure, not a turn outcome
                self._send(500, {"error": f"{type(exc).__name__}: {exc}"})
                return
            self._send(200, {"reply": reply, "turn": session.turn})
            return
        self._send(404, {"error": "not found"})

    def do_GET(self) -> None:  # noqa: N802 - stdlib naming
        runtime = self.server.runtime
        parsed = urlparse(self.path)
        query = parse_qs(parsed.query)

        if parsed.path == "/api/tree":
            tree_text = runtime.data_manager.serialized_snapshot()
            self._send(200, json.loads(tree_text))
            return

        match = _SESSION_EVENTS.match(parsed.path)
        if match:
            session_id = match.group(1)
            if session_id not in runtime.sessions:
                self._send(404, {"error": "unknown session"})
                return
            after = int(query.get("after", ["0"])[0])
            wait = min(float(query.get("wait", ["0"])[0]), MAX_LONG_POLL_SECS)
            if wait > 0:
                events = runtime.event_log.wait_for(after, wait, session_id=session_id)
            else:
                events = runtime.event_log.events(after=after, session_id=session_id)
            self._send(
                200,
                {
                    "events": [
                        {
                            "seq": e.seq,
                            "timestamp": e.timestamp,
                            "session_id": e.session_id,
                            "kind": e.kind,
                            "payload": e.payload,
                        }
                        for e in events
                    ]
                },
            )
            return

        match = _VALIDATION.match(parsed.path)
        if match:
            seq = int(match.group(1))
            hits = [
                e
                for e in runtime.event_log.events()
                if e.seq == seq and e.kind == "validation_report"
            ]
            if not hits:
                self._send(404, {"error": "no validation report at that seq"})
                return
            self._send(200, hits[0].payload)
            return

        self._send(404, {"error": "not found"})


def serve(runtime: Runtime, host: str = "127.0.0.1", port: int | None = None) -> RuntimeHTTPServer:
    return RuntimeHTTPServer(runtime, host=host, port=port)
