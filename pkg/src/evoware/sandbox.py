"""Isolated program execution with full effect capture.

A run produces not just canonicalized output and exit status but the
program's observable effect on the workspace: which files were created,
modified or deleted (by content hash) and which environment variables the
program exported through the side-channel file. Two runs are equivalent
only when all of it matches; any error outcome is equivalent to nothing,
itself included.

Validation mode clones the managed root per cell so candidate programs can
never touch the live software. Invocation mode runs against the live root
on purpose: integrated functionality is allowed to take real effect.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import RuntimeConfig
from .errors import CloneFailure
from .tree import BOOKKEEPING_DIR, ENV_SIDE_CHANNEL, normalized_relative_path

STDERR_TAIL_CHARS = 2000
ERROR_CLASSES = ("nonzero_exit", "timeout", "spawn_failure")

FsDelta = frozenset  # of (path, change, digest-or-None) tuples


@dataclass(frozen=True)
class TestInput:
    """One input-only test: arguments, optional stdin, optional files
    staged into the workspace before execution. No expected outputs."""

    __test__ = False  # not a pytest class despite the name

    label: str
    argv: tuple[str, ...] = ()
    stdin_text: str | None = None
    pre_files: tuple[tuple[str, str], ...] = ()

    @classmethod
    def from_dict(cls, raw: dict) -> "TestInput":
        if not isinstance(raw, dict) or "label" not in raw:
            raise ValueError(f"test input must be an object with a label: {raw!r}")
        argv = raw.get("argv", [])
        if not isinstance(argv, list) or not all(isinstance(a, str) for a in argv):
            raise ValueError(f"argv must be a list of strings: {raw!r}")
        pre_files = []
        for item in raw.get("pre_files", []):
            pre_files.append((normalized_relative_path(item["path"]), item["content"]))
        stdin_text = raw.get("stdin")
        if stdin_text is not None and not isinstance(stdin_text, str):
            raise ValueError(f"stdin must be a string: {raw!r}")
        return cls(
            label=str(raw["label"]),
            argv=tuple(argv),
            stdin_text=stdin_text,
            pre_files=tuple(pre_files),
        )

    def to_dict(self) -> dict:
        out: dict = {"label": self.label, "argv": list(self.argv)}
        if self.stdin_text is not None:
            out["stdin"] = self.stdin_text
        if self.pre_files:
            out["pre_files"] = [{"path": p, "content": c} for p, c in self.pre_files]
        return out


@dataclass(frozen=True)
class ExecutionResult:
    status: str  # completed | error
    stdout_norm: str = ""
    stderr_tail: str = ""
    error_class: str | None = None  # nonzero_exit | timeout | spawn_failure
    fs_delta: FsDelta = frozenset()
    env_delta: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def is_error(self) -> bool:
        return self.status == "error"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "error_class": self.error_class,
            "stdout_norm": self.stdout_norm,
            "stderr_tail": self.stderr_tail,
            "fs_delta": [
                {"path": p, "change": c, "digest": d}
                for p, c, d in sorted(self.fs_delta)
            ],
            "env_delta": dict(sorted(self.env_delta.items())),
            "wall_time": round(self.wall_time, 4),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExecutionResult":
        return cls(
            status=raw["status"],
            error_class=raw.get("error_class"),
            stdout_norm=raw.get("stdout_norm", ""),
            stderr_tail=raw.get("stderr_tail", ""),
            fs_delta=frozenset(
                (d["path"], d["change"], d.get("digest")) for d in raw.get("fs_delta", [])
            ),
            env_delta=raw.get("env_delta", {}),
            wall_time=raw.get("wall_time", 0.0),
        )


def canonicalize_stdout(text: str) -> str:
    """Normalize formatting noise that must not defeat consensus: line
    endings, trailing whitespace per line, trailing blank lines."""
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)


def result_equal(a: ExecutionResult, b: ExecutionResult) -> bool:
    """Execution-result equivalence: identical canonical output and
    identical workspace and environment effects. Errors equal nothing,
    including other errors, so uniformly crashing pools cannot form a
    winning consensus."""
    if a.is_error or b.is_error:
        return False
    return (
        a.stdout_norm == b.stdout_norm
        and a.fs_delta == b.fs_delta
        and a.env_delta == b.env_delta
    )


def _digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _skip_entry(name: str) -> bool:
    return name in (BOOKKEEPING_DIR, ENV_SIDE_CHANNEL)


def snapshot_files(root: Path) -> dict[str, str]:
    """Map of workspace-relative path to content digest, excluding runtime
    bookkeeping."""
    snapshot: dict[str, str] = {}
    root = Path(root)
    stack = [root]
    while stack:
        directory = stack.pop()
        for entry in sorted(directory.iterdir(), key=lambda p: p.name):
            rel = entry.relative_to(root)
            if _skip_entry(rel.parts[0]):
                continue
            if entry.is_dir() and not entry.is_symlink():
                stack.append(entry)
            elif entry.is_file():
                snapshot[rel.as_posix()] = _digest_bytes(entry.read_bytes())
    return snapshot


def diff_snapshots(before: dict[str, str], after: dict[str, str]) -> FsDelta:
    delta = set()
    for path, digest in after.items():
        if path not in before:
            delta.add((path, "created", digest))
        elif before[path] != digest:
            delta.add((path, "modified", digest))
    for path in before:
        if path not in after:
            delta.add((path, "deleted", None))
    return frozenset(delta)


def tree_digest(root: Path) -> str:
    """Single digest of the whole managed root content (bookkeeping
    excluded); used to assert isolation and turn atomicity."""
    snapshot = snapshot_files(root)
    payload = json.dumps(sorted(snapshot.items())).encode()
    return _digest_bytes(payload)


def _read_env_side_channel(workspace: Path) -> dict:
    """The side channel is a JSON object written by the program to
    `.evoware-env`: string values are exports, null marks a deletion."""
    channel = workspace / ENV_SIDE_CHANNEL
    if not channel.exists():
        return {}
    try:
        raw = json.loads(channel.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, OSError):
        return {}
    if not isinstance(raw, dict):
        return {}
    return {
        str(k): (v if isinstance(v, str) else None)
        for k, v in raw.items()
    }


_DENY_NETWORK_GUARD = """\
import socket

def _denied(*args, **kwargs):
    raise OSError("network access denied by sandbox policy")

socket.socket = _denied
socket.create_connection = _denied
"""


class Sandbox:
    """Runs program texts (validation) or stored artifacts (invocation)."""

    def __init__(self, config: RuntimeConfig):
        self.config = config

    # -- validation mode -------------------------------------------------

    def run(
        self,
        program_text: str,
        dependencies: list[str],
        test_input: TestInput,
        base: Path,
        program_path: str = "candidate.py",
    ) -> ExecutionResult:
        """Execute one (candidate, input) cell against a disposable clone
        of `base`. The clone, staged pre_files and the candidate file form
        the cell's initial state; fs_delta is everything the run changed
        beyond that. The live base is never touched."""
        rel_path = normalized_relative_path(program_path)
        base = Path(base).resolve()
        with tempfile.TemporaryDirectory(prefix="evoware-cell-") as cell:
            cell_dir = Path(cell)
            workspace = cell_dir / "workspace"
            try:
                shutil.copytree(base, workspace, ignore=shutil.ignore_patterns(BOOKKEEPING_DIR))
            except OSError as exc:
                raise CloneFailure(f"cannot clone workspace from {base}: {exc}") from exc

            program_file = workspace / rel_path
            program_file.parent.mkdir(parents=True, exist_ok=True)
            program_file.write_text(program_text, encoding="utf-8")
            for pre_path, content in test_input.pre_files:
                staged = workspace / pre_path
                staged.parent.mkdir(parents=True, exist_ok=True)
                staged.write_text(content, encoding="utf-8")

            site_dir = cell_dir / "site"
            site_dir.mkdir()
            install_error = self._install(dependencies, site_dir)
            if install_error is not None:
                # Candidates must stay comparable: install failures become
                # error results, never exceptions.
                return install_error

            before = snapshot_files(workspace)
            result = self._execute(
                program_file=program_file,
                argv=list(test_input.argv),
                stdin_text=test_input.stdin_text,
                workspace=workspace,
                site_dir=site_dir,
            )
            after = snapshot_files(workspace)
            return ExecutionResult(
                status=result.status,
                error_class=result.error_class,
                stdout_norm=result.stdout_norm,
                stderr_tail=result.stderr_tail,
                fs_delta=diff_snapshots(before, after),
                env_delta=_read_env_side_channel(workspace),
                wall_time=result.wall_time,
            )

    # -- invocation mode -------------------------------------------------

    def run_stored(
        self,
        root: Path,
        rel_path: str,
        argv: list[str],
        stdin_text: str | None = None,
    ) -> ExecutionResult:
        """Execute an integrated artifact against the live managed root.
        Real effects (appending to data files, deleting downloads) are the
        point; the caller records the resulting fs_delta."""
        root = Path(root).resolve()
        program_file = root / normalized_relative_path(rel_path)
        site_dir = root / BOOKKEEPING_DIR / "site"
        before = snapshot_files(root)
        result = self._execute(
            program_file=program_file,
            argv=argv,
            stdin_text=stdin_text,
            workspace=root,
            site_dir=site_dir if site_dir.exists() else None,
        )
        after = snapshot_files(root)
        env_delta = _read_env_side_channel(root)
        (root / ENV_SIDE_CHANNEL).unlink(missing_ok=True)
        return ExecutionResult(
            status=result.status,
            error_class=result.error_class,
            stdout_norm=result.stdout_norm,
            stderr_tail=result.stderr_tail,
            fs_delta=diff_snapshots(before, after),
            env_delta=env_delta,
            wall_time=result.wall_time,
        )

    # -- internals --------------------------------------------------------

    def _install(self, dependencies: list[str], site_dir: Path) -> ExecutionResult | None:
        if not dependencies:
            return None
        argv = self.config.installer_argv(site_dir, dependencies)
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                timeout=max(self.config.timeout_secs * 6, 60),
                cwd=site_dir,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            return ExecutionResult(
                status="error",
                error_class="spawn_failure",
                stderr_tail=f"dependency install failed: {exc}"[-STDERR_TAIL_CHARS:],
            )
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "")[-STDERR_TAIL_CHARS:]
            return ExecutionResult(
                status="error",
                error_class="spawn_failure",
                stderr_tail=f"dependency install failed: {tail}"[-STDERR_TAIL_CHARS:],
            )
        return None

    def _execute(
        self,
        program_file: Path,
        argv: list[str],
        stdin_text: str | None,
        workspace: Path,
        site_dir: Path | None,
    ) -> ExecutionResult:
        env = os.environ.copy()
        env["PYTHONDONTWRITEBYTECODE"] = "1"
        python_path = [str(workspace)]
        if site_dir is not None:
            python_path.append(str(site_dir))
        guard_dir: tempfile.TemporaryDirectory | None = None
        if self.config.network == "deny":
            # Guard only covers programs run through the configured Python
            # runner; OS-level egress control is out of scope.
            guard_dir = tempfile.TemporaryDirectory(prefix="evoware-guard-")
            (Path(guard_dir.name) / "sitecustomize.py").write_text(
                _DENY_NETWORK_GUARD, encoding="utf-8"
            )
            python_path.insert(0, guard_dir.name)
        if env.get("PYTHONPATH"):
            python_path.append(env["PYTHONPATH"])
        env["PYTHONPATH"] = os.pathsep.join(python_path)

        cmd = self.config.runner_argv(program_file) + argv
        start = time.monotonic()
        try:
            try:
                proc = subprocess.Popen(
                    cmd,
                    cwd=workspace,
                    env=env,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.PIPE,
                    text=True,
                    errors="replace",
                    start_new_session=True,
                )
            except OSError as exc:
                return ExecutionResult(
                    status="error",
                    error_class="spawn_failure",
                    stderr_tail=str(exc)[-STDERR_TAIL_CHARS:],
                    wall_time=time.monotonic() - start,
                )
            try:
                stdout, stderr = proc.communicate(
                    input=stdin_text, timeout=self.config.timeout_secs
                )
            except subprocess.TimeoutExpired:
                try:
                    os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
                except (ProcessLookupError, PermissionError):
                    proc.kill()
                proc.wait()
                return ExecutionResult(
                    status="error",
                    error_class="timeout",
                    stderr_tail=f"timed out after {self.config.timeout_secs}s",
                    wall_time=time.monotonic() - start,
                )
        finally:
            if guard_dir is not None:
                guard_dir.cleanup()
        wall = time.monotonic() - start

        if proc.returncode != 0:
            return ExecutionResult(
                status="error",
                error_class="nonzero_exit",
                stdout_norm=canonicalize_stdout(stdout or ""),
                stderr_tail=(stderr or "")[-STDERR_TAIL_CHARS:],
                wall_time=wall,
            )
        return ExecutionResult(
            status="completed",
            stdout_norm=canonicalize_stdout(stdout or ""),
            stderr_tail=(stderr or "")[-STDERR_TAIL_CHARS:],
            wall_time=wall,
        )
