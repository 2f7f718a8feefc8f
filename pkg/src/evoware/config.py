"""Runtime configuration with flags > environment > config file > defaults."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_PREFIX = "EVOWARE_"

DEFAULT_RUNNER = "{python} {file}"
DEFAULT_INSTALLER = (
    "{python} -m pip install --quiet --disable-pip-version-check --target {site} {packages}"
)


@dataclass
class RuntimeConfig:
    managed_root: Path = Path("evoware-root")
    backend: str = "replay"  # live | replay
    model: str = "gpt-4o"
    api_key_env: str = "EVOWARE_API_KEY"
    api_base_url: str = "https://api.openai.com/v1"
    replay_script: Path | None = None
    candidates: int = 3  # pool size N
    tests: int = 5  # suite size K
    timeout_secs: float = 10.0
    max_repair_rounds: int = 3
    worker_limit: int = 4
    network: str = "allow"  # allow | deny
    runner: str = DEFAULT_RUNNER
    installer: str = DEFAULT_INSTALLER
    http_port: int = 8337
    generation_mode: str = "independent"  # independent | batch
    prompt_dir: Path | None = None
    probe_before_decide: bool = False

    def validate(self) -> "RuntimeConfig":
        if self.backend not in ("live", "replay"):
            raise ConfigError(f"backend must be live or replay, got {self.backend!r}")
        if self.backend == "replay" and self.replay_script is None:
            raise ConfigError("replay backend requires a replay script")
        if self.candidates < 1:
            raise ConfigError("candidates (pool size) must be >= 1")
        if self.tests < 1:
            raise ConfigError("tests (suite size) must be >= 1")
        if self.timeout_secs <= 0:
            raise ConfigError("timeout_secs must be > 0")
        if self.max_repair_rounds < 1:
            raise ConfigError("max_repair_rounds must be >= 1")
        if self.worker_limit < 1:
            raise ConfigError("worker_limit must be >= 1")
        if self.network not in ("allow", "deny"):
            raise ConfigError(f"network must be allow or deny, got {self.network!r}")
        if self.generation_mode not in ("independent", "batch"):
            raise ConfigError("generation_mode must be independent or batch")
        if "{file}" not in self.runner:
            raise ConfigError("runner template must contain a {file} placeholder")
        return self

    def runner_argv(self, file: Path) -> list[str]:
        import shlex

        cmd = self.runner.replace("{python}", sys.executable).replace("{file}", str(file))
        return shlex.split(cmd)

    def installer_argv(self, site: Path, packages: list[str]) -> list[str]:
        import shlex

        cmd = (
            self.installer.replace("{python}", sys.executable)
            .replace("{site}", str(site))
            .replace("{packages}", " ".join(packages))
        )
        return shlex.split(cmd)


_PATH_FIELDS = {"managed_root", "replay_script", "prompt_dir"}
_INT_FIELDS = {"candidates", "tests", "max_repair_rounds", "worker_limit", "http_port"}
_FLOAT_FIELDS = {"timeout_secs"}
_BOOL_FIELDS = {"probe_before_decide"}


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _PATH_FIELDS:
        return Path(value)
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _BOOL_FIELDS:
        if isinstance(value, bool):
            return value
        return str(value).lower() in ("1", "true", "yes", "on")
    return value


def load_config(
    flags: dict | None = None,
    config_file: Path | None = None,
    env: dict | None = None,
) -> RuntimeConfig:
    """Assemble a RuntimeConfig, later sources overriding earlier ones."""
    env = os.environ if env is None else env
    values: dict = {}

    if config_file is not None:
        try:
            raw = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
        values.update(raw)

    known = {f.name for f in fields(RuntimeConfig)}
    for name in known:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]

    for name, value in (flags or {}).items():
        if value is not None:
            values[name] = value

    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    coerced = {name: _coerce(name, value) for name, value in values.items()}
    return RuntimeConfig(**coerced).validate()
