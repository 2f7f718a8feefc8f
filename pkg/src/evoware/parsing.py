"""Fenced-block extraction shared by the agent response parsers."""

from __future__ import annotations

import json
import re

# A block opened with N backticks closes only on a fence of >= N, so
# programs that themselves contain ``` can be carried inside ```` fences.
_FENCE_RE = re.compile(
    r"^(?P<fence>`{3,})(?P<lang>[A-Za-z0-9_+-]*)[ \t]*\r?\n"
    r"(?P<body>.*?)"
    r"^(?P=fence)`*[ \t]*$",
    re.DOTALL | re.MULTILINE,
)


def fenced_blocks(text: str) -> list[tuple[str, str]]:
    """All fenced blocks as (language, body) pairs, in document order."""
    return [(m.group("lang").lower(), m.group("body")) for m in _FENCE_RE.finditer(text)]


def json_blocks(text: str):
    """Parsed payloads of every ```json block; unparseable blocks are skipped."""
    parsed = []
    for lang, body in fenced_blocks(text):
        if lang != "json":
            continue
        try:
            parsed.append(json.loads(body))
        except json.JSONDecodeError:
            continue
    return parsed


def code_blocks(text: str) -> list[str]:
    """Bodies of fenced blocks that are not JSON metadata."""
    return [body for lang, body in fenced_blocks(text) if lang != "json"]
