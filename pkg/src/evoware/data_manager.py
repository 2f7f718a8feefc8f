"""Managed storage for the evolving software's body.

All reads, writes, merges and executions of stored programs go through
here. The on-disk hierarchy is mirrored by a metadata tree that agents
consume as JSON; the tree and the disk are kept equal by construction
(merges update both) and by rescans after invocations that changed files.

The narrow surface (snapshot/merge/lookup/execute) is deliberate so a
database-backed implementation can be substituted behind it later.
"""

from __future__ import annotations

import os
import re
import subprocess
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .config import RuntimeConfig
from .errors import PathEscape, RootMissing, UnknownPath, WriteFailure
from .sandbox import ExecutionResult, Sandbox
from .tree import (
    BOOKKEEPING_DIR,
    FunctionalityRecord,
    TreeNode,
    build_tree,
    normalized_relative_path,
    parse_tree,
    serialize_tree,
)

TREE_FILE = "tree.json"
EVENTS_FILE = "events.ndjson"
LOOKUP_LIMIT = 5
_TOKEN_RE = re.compile(r"[a-z0-9]{3,}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


class DataManager:
    def __init__(
        self,
        root: Path,
        config: RuntimeConfig | None = None,
        event_sink: Callable[[str, dict], None] | None = None,
        create: bool = False,
    ):
        # Resolve up front: stored programs run with cwd inside the root, so
        # a relative root would make their own paths unresolvable.
        self.root = Path(root).resolve()
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        if not self.root.is_dir():
            raise RootMissing(f"managed root does not exist: {self.root}")
        self.config = config
        self.event_sink = event_sink
        self.sandbox: Sandbox | None = Sandbox(config) if config is not None else None
        self._records: dict[str, FunctionalityRecord] = {}
        self._load_records()
        self._tree = self._scan()
        self._save()

    # -- bookkeeping -------------------------------------------------------

    @property
    def bookkeeping_dir(self) -> Path:
        return self.root / BOOKKEEPING_DIR

    @property
    def tree_path(self) -> Path:
        return self.bookkeeping_dir / TREE_FILE

    @property
    def events_path(self) -> Path:
        return self.bookkeeping_dir / EVENTS_FILE

    def _load_records(self) -> None:
        if not self.tree_path.exists():
            return
        try:
            stored = parse_tree(self.tree_path.read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError):
            return
        for node in stored.file_nodes():
            if node.record is not None:
                if (self.root / node.record.path).is_file():
                    self._records[node.record.path] = node.record

    def _scan(self) -> TreeNode:
        if not self.root.is_dir():
            raise RootMissing(f"managed root does not exist: {self.root}")
        # Drop records whose file vanished since the last scan.
        self._records = {
            path: record
            for path, record in self._records.items()
            if (self.root / path).is_file()
        }
        return build_tree(self.root, self._records)

    def _save(self) -> None:
        self.bookkeeping_dir.mkdir(parents=True, exist_ok=True)
        self.tree_path.write_text(serialize_tree(self._tree), encoding="utf-8")

    def _emit(self, kind: str, payload: dict) -> None:
        if self.event_sink is not None:
            self.event_sink(kind, payload)

    # -- operations ---------------------------------------------------------

    def snapshot_tree(self) -> TreeNode:
        if not self.root.is_dir():
            raise RootMissing(f"managed root does not exist: {self.root}")
        return self._tree.copy()

    def serialized_snapshot(self) -> str:
        return serialize_tree(self.snapshot_tree())

    def rescan(self) -> TreeNode:
        """Rebuild the tree from disk; used after invocations with effects
        and available to callers verifying mirror fidelity."""
        self._tree = self._scan()
        self._save()
        return self._tree.copy()

    def record_for(self, rel_path: str) -> FunctionalityRecord | None:
        return self._records.get(rel_path)

    def records(self) -> list[FunctionalityRecord]:
        return [self._records[path] for path in sorted(self._records)]

    def merge_artifact(self, program_text: str, record: FunctionalityRecord) -> TreeNode:
        """Atomically integrate a validated program: dependencies first,
        then temp-write + rename so a crash never corrupts the previous
        artifact, then tree update and integration event."""
        try:
            rel_path = normalized_relative_path(record.path)
        except ValueError as exc:
            raise PathEscape(str(exc)) from exc

        self._install_on_merge(record.dependencies)

        target = self.root / rel_path
        existing = self._records.get(rel_path)
        now = _now()
        stamped = FunctionalityRecord(
            path=rel_path,
            purpose=record.purpose,
            usage=record.usage,
            dependencies=list(record.dependencies),
            created_at=existing.created_at if existing else now,
            updated_at=now,
        )
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, temp_name = tempfile.mkstemp(dir=target.parent, prefix=".merge-")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(program_text)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(temp_name, target)
            except BaseException:
                Path(temp_name).unlink(missing_ok=True)
                raise
        except OSError as exc:
            raise WriteFailure(f"cannot write artifact {rel_path}: {exc}") from exc

        self._records[rel_path] = stamped
        self._tree = self._scan()
        self._save()
        self._emit(
            "integration",
            {"path": rel_path, "purpose": stamped.purpose, "updated_at": stamped.updated_at},
        )
        return self._tree.copy()

    def _install_on_merge(self, dependencies: list[str]) -> None:
        if not dependencies or self.config is None:
            return
        site = self.bookkeeping_dir / "site"
        site.mkdir(parents=True, exist_ok=True)
        argv = self.config.installer_argv(site, dependencies)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=300, cwd=site)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise WriteFailure(f"dependency install failed: {exc}") from exc
        if proc.returncode != 0:
            detail = (proc.stderr or proc.stdout or "").strip()[-500:]
            raise WriteFailure(f"dependency install failed: {detail}")

    def lookup(self, query: str) -> list[tuple[FunctionalityRecord, str]]:
        """Cheap deterministic shortlist; the leader's model makes the
        actual reuse decision."""
        query_tokens = _tokens(query)
        scored: list[tuple[int, str, FunctionalityRecord, str]] = []
        for path in sorted(self._records):
            record = self._records[path]
            overlap = query_tokens & _tokens(f"{record.purpose} {record.usage}")
            if overlap:
                note = "matches: " + ", ".join(sorted(overlap))
                scored.append((len(overlap), path, record, note))
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [(record, note) for _, _, record, note in scored[:LOOKUP_LIMIT]]

    def execute_stored(
        self, rel_path: str, args: list[str], stdin_text: str | None = None
    ) -> ExecutionResult:
        if rel_path not in self._records:
            raise UnknownPath(f"no functionality record for {rel_path!r}")
        if self.sandbox is None:
            raise RuntimeError("data manager has no sandbox configured")
        result = self.sandbox.run_stored(self.root, rel_path, args, stdin_text)
        if result.fs_delta:
            # Stored programs may create or mutate sibling files; rescan so
            # the tree keeps mirroring the disk.
            self._tree = self._scan()
            self._save()
        self._emit(
            "invocation",
            {
                "path": rel_path,
                "argv": list(args),
                "status": result.status,
                "error_class": result.error_class,
                "fs_delta": sorted(p for p, _, _ in result.fs_delta),
            },
        )
        return result
