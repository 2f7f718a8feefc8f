"""Candidate program generation.

Produces the pool of independently sampled implementations for one
requested functionality. Each response must carry exactly one fenced code
block (the program) and one fenced JSON block (path, purpose, usage,
dependencies); anything else is malformed and retried once before the
candidate is dropped.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace

from .config import RuntimeConfig
from .errors import MalformedCandidate
from .gateway import ChatMessage, ChatRequest, Gateway
from .parsing import code_blocks, json_blocks
from .prompt_store import load_prompt
from .tree import FunctionalityRecord, normalized_relative_path

GENERATOR_TEMPERATURE = 0.8


@dataclass(frozen=True)
class GenerationRequest:
    functionality_spec: str
    tree_summary: str
    prior_feedback: str | None = None
    round: int = 1

    def __post_init__(self) -> None:
        if self.round < 1:
            raise ValueError("round must be >= 1")


@dataclass
class CandidateProgram:
    program_text: str
    dependencies: list[str]
    proposed_record: FunctionalityRecord
    generation_index: int


def parse_candidate(response_text: str, generation_index: int) -> CandidateProgram:
    """Extract the single program block and single metadata block."""
    programs = code_blocks(response_text)
    metas = [b for b in json_blocks(response_text) if isinstance(b, dict)]
    if not programs:
        raise MalformedCandidate("missing program block")
    if len(programs) > 1:
        raise MalformedCandidate("ambiguous program block")
    if not metas:
        raise MalformedCandidate("missing metadata block")
    if len(metas) > 1:
        raise MalformedCandidate("ambiguous metadata block")
    meta = metas[0]
    for key in ("path", "purpose", "usage"):
        value = meta.get(key)
        if not isinstance(value, str) or not value.strip():
            raise MalformedCandidate(f"metadata missing {key!r}")
    try:
        path = normalized_relative_path(meta["path"])
    except ValueError as exc:
        raise MalformedCandidate(f"unacceptable path: {exc}") from exc
    dependencies = meta.get("dependencies", [])
    if not isinstance(dependencies, list) or not all(isinstance(d, str) for d in dependencies):
        raise MalformedCandidate("dependencies must be a list of package names")
    program_text = programs[0]
    if not program_text.strip():
        raise MalformedCandidate("program block is empty")
    return CandidateProgram(
        program_text=program_text,
        dependencies=list(dependencies),
        proposed_record=FunctionalityRecord(
            path=path, purpose=meta["purpose"], usage=meta["usage"], dependencies=list(dependencies)
        ),
        generation_index=generation_index,
    )


def parse_batch(response_text: str) -> list[CandidateProgram]:
    """Batch mode: one fenced JSON array of candidate objects, each with
    path/purpose/usage/dependencies plus the program text inline."""
    arrays = [b for b in json_blocks(response_text) if isinstance(b, list)]
    if not arrays:
        raise MalformedCandidate("batch response contains no fenced JSON array")
    candidates = []
    for position, item in enumerate(arrays[0], start=1):
        if not isinstance(item, dict) or not isinstance(item.get("program"), str):
            raise MalformedCandidate(f"batch candidate {position} lacks a program string")
        meta = {k: v for k, v in item.items() if k != "program"}
        wrapped = (
            "```\n" + item["program"] + "\n```\n"
            "```json\n" + json.dumps(meta) + "\n```"
        )
        candidates.append(parse_candidate(wrapped, position))
    if not candidates:
        raise MalformedCandidate("batch response contains no candidates")
    return candidates


class Generator:
    def __init__(self, gateway: Gateway, config: RuntimeConfig):
        self.gateway = gateway
        self.config = config

    def generate_pool(self, request: GenerationRequest, n: int):
        from .validator import CandidatePool

        if n < 1:
            raise ValueError("pool size must be >= 1")
        if request.round > self.config.max_repair_rounds:
            raise ValueError("round exceeds max repair rounds")
        if self.config.generation_mode == "batch":
            candidates = self._generate_batch(request, n)
        else:
            candidates = self._generate_independent(request, n)
        if not candidates:
            raise MalformedCandidate("no candidate could be parsed in this round")
        # The pool implements one functionality; divergent proposed paths
        # are unified to the first candidate's.
        unified_path = candidates[0].proposed_record.path
        for candidate in candidates[1:]:
            candidate.proposed_record = replace(candidate.proposed_record, path=unified_path)
        for position, candidate in enumerate(candidates, start=1):
            candidate.generation_index = position
        return CandidatePool(candidates=candidates)

    def _generate_independent(self, request: GenerationRequest, n: int):
        candidates = []
        for _ in range(n):
            response = self._call(self._prompt(request))
            try:
                candidates.append(parse_candidate(response.text, len(candidates) + 1))
                continue
            except MalformedCandidate as first_error:
                retry = self._call(
                    self._prompt(request)
                    + f"\n\nYour previous response was unusable ({first_error}). "
                    "Reply again with exactly one fenced code block and one fenced JSON "
                    "metadata block."
                )
                try:
                    candidates.append(parse_candidate(retry.text, len(candidates) + 1))
                except MalformedCandidate:
                    continue  # drop this candidate, pool shrinks by one
        return candidates

    def _generate_batch(self, request: GenerationRequest, n: int):
        prompt = (
            self._prompt(request)
            + f"\n\nProduce {n} independent candidate implementations as one fenced JSON "
            'array of objects: {"path", "purpose", "usage", "dependencies", "program"}.'
        )
        response = self._call(prompt)
        return parse_batch(response.text)[:n]

    def _prompt(self, request: GenerationRequest) -> str:
        parts = [
            f"Functionality needed:\n{request.functionality_spec}",
            f"Current software tree:\n{request.tree_summary}",
        ]
        if request.prior_feedback:
            parts.append(
                f"Repair feedback from validation round {request.round - 1}:\n"
                f"{request.prior_feedback}"
            )
        return "\n\n".join(parts)

    def _call(self, prompt: str):
        request = ChatRequest(
            messages=(
                ChatMessage("system", load_prompt("generator", self.config.prompt_dir)),
                ChatMessage("user", prompt),
            ),
            agent_name="generator",
            request_id=f"generator-{uuid.uuid4().hex[:12]}",
            temperature_hint=GENERATOR_TEMPERATURE,
        )
        return self.gateway.complete(request)
