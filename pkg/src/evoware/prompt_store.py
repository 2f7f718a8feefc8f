"""Agent prompt templates, shipped as editable files rather than code."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

PROMPT_NAMES = ("leader", "generator", "validator", "responder")


def load_prompt(name: str, override_dir: Path | None = None) -> str:
    if name not in PROMPT_NAMES:
        raise ValueError(f"unknown prompt: {name}")
    if override_dir is not None:
        candidate = Path(override_dir) / f"{name}.md"
        if candidate.exists():
            return candidate.read_text(encoding="utf-8")
    return (resources.files("evoware") / "prompts" / f"{name}.md").read_text(encoding="utf-8")
