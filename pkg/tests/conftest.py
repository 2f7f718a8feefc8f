from pathlib import Path

import pytest

from evoware.config import RuntimeConfig
from evoware.sandbox import ExecutionResult

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = REPO_ROOT / "scenarios"


@pytest.fixture
def root(tmp_path) -> Path:
    managed = tmp_path / "managed"
    managed.mkdir()
    return managed


def make_config(root: Path, **overrides) -> RuntimeConfig:
    values = dict(
        managed_root=root,
        backend="replay",
        replay_script=None,
        candidates=3,
        tests=2,
        timeout_secs=10.0,
        max_repair_rounds=3,
        worker_limit=2,
    )
    values.update(overrides)
    config = RuntimeConfig(**values)
    # replay configs in unit tests often inject the script object directly
    return config


def completed(stdout: str = "", fs_delta=frozenset(), env_delta=None) -> ExecutionResult:
    return ExecutionResult(
        status="completed",
        stdout_norm=stdout,
        fs_delta=frozenset(fs_delta),
        env_delta=env_delta or {},
    )


def errored(error_class: str = "nonzero_exit", stderr: str = "boom") -> ExecutionResult:
    return ExecutionResult(status="error", error_class=error_class, stderr_tail=stderr)
