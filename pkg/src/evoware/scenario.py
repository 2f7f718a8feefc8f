"""Scripted end-to-end scenarios.

A scenario file bundles a replay script, config overrides, optional files
staged into the managed root, and a sequence of user turns, each with
checkable expectations (reply substrings, event-kind ordering, file
presence, root-digest stability). The runner replays it against a fresh
runtime and reports findings; the CLI maps those to exit status.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .config import RuntimeConfig
from .events import EvolutionEvent
from .gateway import ReplayScript
from .sandbox import tree_digest
from .session import Runtime, Session


@dataclass
class Scenario:
    name: str
    script: ReplayScript
    turns: list[dict]
    config_overrides: dict = field(default_factory=dict)
    pre_files: list[tuple[str, str]] = field(default_factory=list)
    description: str = ""


@dataclass
class ScenarioResult:
    name: str
    ok: bool
    findings: list[str]
    replies: list[str]
    events: list[EvolutionEvent]
    root: Path

    def turn_events(self, turn: int) -> list[EvolutionEvent]:
        return [e for e in self.events if e.payload.get("turn") == turn]


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    pre_files = []
    for item in raw.get("pre_files", []):
        content = item.get("content")
        if content is None and "content_file" in item:
            content = (base / item["content_file"]).read_text(encoding="utf-8")
        if content is None:
            raise ValueError(f"pre_file without content: {item!r}")
        pre_files.append((item["path"], content))
    return Scenario(
        name=raw["name"],
        description=raw.get("description", ""),
        script=ReplayScript.from_dicts(raw["script"], base_dir=base),
        turns=raw["turns"],
        config_overrides=raw.get("config", {}),
        pre_files=pre_files,
    )


def _event_matches(event: EvolutionEvent, spec) -> bool:
    if isinstance(spec, str):
        return event.kind == spec
    if event.kind != spec.get("kind"):
        return False
    wanted = spec.get("payload", {})
    return all(event.payload.get(key) == value for key, value in wanted.items())


def _spec_name(spec) -> str:
    return spec if isinstance(spec, str) else f"{spec.get('kind')}{spec.get('payload', {})}"


def _check_turn(
    scenario_root: Path,
    turn_number: int,
    expect: dict,
    reply: str,
    events: list[EvolutionEvent],
    digest_before: str,
    digest_after: str,
) -> list[str]:
    findings = []
    prefix = f"turn {turn_number}"
    for needle in expect.get("reply_contains", []):
        if needle not in reply:
            findings.append(f"{prefix}: reply missing {needle!r} (got {reply[:200]!r})")
    cursor = 0
    for spec in expect.get("events_include", []):
        while cursor < len(events) and not _event_matches(events[cursor], spec):
            cursor += 1
        if cursor == len(events):
            findings.append(f"{prefix}: event sequence lacks {_spec_name(spec)}")
            break
        cursor += 1
    for kind in expect.get("events_exclude", []):
        if any(e.kind == kind for e in events):
            findings.append(f"{prefix}: unexpected {kind} event")
    for rel in expect.get("files_exist", []):
        if not (scenario_root / rel).exists():
            findings.append(f"{prefix}: expected file missing: {rel}")
    for rel in expect.get("files_absent", []):
        if (scenario_root / rel).exists():
            findings.append(f"{prefix}: file should be absent: {rel}")
    for item in expect.get("file_contains", []):
        target = scenario_root / item["path"]
        if not target.exists():
            findings.append(f"{prefix}: file missing for content check: {item['path']}")
        elif item["text"] not in target.read_text(encoding="utf-8"):
            findings.append(f"{prefix}: {item['path']} lacks {item['text']!r}")
    if expect.get("root_digest_unchanged") and digest_before != digest_after:
        findings.append(f"{prefix}: managed root changed but was expected stable")
    return findings


def run_scenario(
    scenario: Scenario,
    root: Path | None = None,
    session: Session | None = None,
) -> ScenarioResult:
    """Replay every turn and evaluate its expectations.

    Passing an existing session is supported so tests can attach event
    listeners before the turns run.
    """
    cleanup = None
    if session is None:
        if root is None:
            cleanup = tempfile.TemporaryDirectory(prefix="evoware-scenario-")
            root = Path(cleanup.name) / "root"
        runtime = build_runtime(scenario, root)
        session = runtime.new_session()
    else:
        runtime = session.runtime
        root = runtime.config.managed_root

    findings: list[str] = []
    replies: list[str] = []
    try:
        for turn_number, turn in enumerate(scenario.turns, start=1):
            digest_before = tree_digest(root)
            reply = session.handle_line(turn["text"])
            digest_after = tree_digest(root)
            replies.append(reply)
            events = [
                e
                for e in runtime.event_log.events(session_id=session.session_id)
                if e.payload.get("turn") == turn_number
            ]
            findings.extend(
                _check_turn(
                    root,
                    turn_number,
                    turn.get("expect", {}),
                    reply,
                    events,
                    digest_before,
                    digest_after,
                )
            )
        all_events = runtime.event_log.events(session_id=session.session_id)
        return ScenarioResult(
            name=scenario.name,
            ok=not findings,
            findings=findings,
            replies=replies,
            events=all_events,
            root=Path(root),
        )
    finally:
        if cleanup is not None:
            cleanup.cleanup()


def build_runtime(scenario: Scenario, root: Path) -> Runtime:
    overrides = dict(scenario.config_overrides)
    overrides["managed_root"] = Path(root)
    overrides.setdefault("backend", "replay")
    config = RuntimeConfig(**{**_defaults(), **overrides})
    config.managed_root.mkdir(parents=True, exist_ok=True)
    for rel, content in scenario.pre_files:
        target = config.managed_root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
    return Runtime(config, script=scenario.script)


def _defaults() -> dict:
    return dict(
        backend="replay",
        candidates=3,
        tests=2,
        timeout_secs=10.0,
        max_repair_rounds=3,
        worker_limit=4,
    )
