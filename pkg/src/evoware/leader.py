"""Session brain: interprets each requirement, chooses reuse vs. evolve
vs. direct answer, drives the evolution pipeline when needed, invokes the
chosen functionality and composes the reply.

A turn can fail (no consensus after the repair budget, malformed model
output, execution errors) but it never wedges the session and it never
leaves a half-integrated tree: integration happens only after an accepted
validation report, so a failed turn leaves the managed root untouched.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from typing import Callable

from .config import RuntimeConfig
from .data_manager import DataManager
from .errors import EvowareError, MalformedDecision
from .gateway import ChatMessage, ChatRequest, Gateway
from .generator import GenerationRequest, Generator
from .parsing import json_blocks
from .prompt_store import load_prompt
from .sandbox import ExecutionResult, TestInput
from .validator import Validator

HISTORY_TURNS = 20
APOLOGY = (
    "I could not work out a reliable way to handle that request. "
    "Could you rephrase it?"
)


@dataclass(frozen=True)
class Requirement:
    session_id: str
    text: str
    turn: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("requirement text must be non-empty")


@dataclass(frozen=True)
class LeaderDecision:
    kind: str  # reuse | evolve | answer
    rationale: str = ""
    path: str | None = None
    argv: tuple[str, ...] = ()
    stdin_text: str | None = None
    spec: str | None = None
    text: str | None = None


class Leader:
    def __init__(
        self,
        gateway: Gateway,
        data_manager: DataManager,
        generator: Generator,
        validator: Validator,
        config: RuntimeConfig,
        emit: Callable[[str, dict], None],
    ):
        self.gateway = gateway
        self.data_manager = data_manager
        self.generator = generator
        self.validator = validator
        self.config = config
        self.emit = emit
        self.history: list[tuple[str, str]] = []  # (user text, reply)

    # -- decision ---------------------------------------------------------

    def decide(self, requirement: Requirement) -> LeaderDecision:
        shortlist = self.data_manager.lookup(requirement.text)
        prompt = self._decide_prompt(requirement, shortlist)
        response = self._call_leader(prompt)
        try:
            decision = self._parse_decision(response.text)
        except MalformedDecision as first_error:
            retry = self._call_leader(
                prompt + f"\n\nYour previous answer was unusable ({first_error}). "
                "Reply with exactly one fenced JSON decision block."
            )
            try:
                decision = self._parse_decision(retry.text)
            except MalformedDecision:
                # The session must never wedge on model misbehaviour.
                decision = LeaderDecision(
                    kind="answer", text=APOLOGY, rationale="decision parse failure"
                )
        self.emit(
            "decision",
            {
                "turn": requirement.turn,
                "kind": decision.kind,
                "rationale": decision.rationale,
                "path": decision.path,
                "spec": decision.spec,
            },
        )
        return decision

    def _decide_prompt(self, requirement: Requirement, shortlist) -> str:
        parts = [f"Decide how to satisfy this requirement:\n{requirement.text}"]
        parts.append("Current software tree:\n" + self.data_manager.serialized_snapshot())
        if shortlist:
            listing = "\n".join(
                f"- {record.path}: {record.purpose} (usage: {record.usage}) [{note}]"
                for record, note in shortlist
            )
            parts.append("Shortlisted stored functionality:\n" + listing)
        else:
            parts.append("Shortlisted stored functionality: none")
        if self.config.probe_before_decide and shortlist:
            parts.append("Probe result:\n" + self._probe(shortlist[0][0]))
        return "\n\n".join(parts)

    def _probe(self, record) -> str:
        """Optional suitability probe; runs in a clone so probing can never
        cause real side effects."""
        sandbox = self.data_manager.sandbox
        program_text = (self.data_manager.root / record.path).read_text(encoding="utf-8")
        result = sandbox.run(
            program_text=program_text,
            dependencies=record.dependencies,
            test_input=TestInput(label="probe"),
            base=self.data_manager.root,
            program_path=record.path,
        )
        return (
            f"{record.path} -> {result.status}"
            f"{f'/{result.error_class}' if result.is_error else ''}, "
            f"stdout: {result.stdout_norm[:200]!r}"
        )

    def _parse_decision(self, text: str) -> LeaderDecision:
        blocks = [b for b in json_blocks(text) if isinstance(b, dict) and "kind" in b]
        if not blocks:
            raise MalformedDecision("no fenced JSON decision block")
        raw = blocks[0]
        kind = raw.get("kind")
        rationale = str(raw.get("rationale", ""))
        argv = raw.get("argv", [])
        if not isinstance(argv, list) or not all(isinstance(a, str) for a in argv):
            raise MalformedDecision("argv must be a list of strings")
        if kind == "reuse":
            path = raw.get("path")
            if not isinstance(path, str) or not path:
                raise MalformedDecision("reuse decision lacks a path")
            if self.data_manager.record_for(path) is None:
                raise MalformedDecision(f"reuse path not in tree: {path!r}")
            return LeaderDecision(
                kind="reuse",
                path=path,
                argv=tuple(argv),
                stdin_text=raw.get("stdin"),
                rationale=rationale,
            )
        if kind == "evolve":
            spec = raw.get("spec")
            if not isinstance(spec, str) or not spec.strip():
                raise MalformedDecision("evolve decision lacks a spec")
            return LeaderDecision(
                kind="evolve",
                spec=spec,
                argv=tuple(argv),
                stdin_text=raw.get("stdin"),
                rationale=rationale,
            )
        if kind == "answer":
            answer = raw.get("text")
            if not isinstance(answer, str) or not answer.strip():
                raise MalformedDecision("answer decision lacks text")
            return LeaderDecision(kind="answer", text=answer, rationale=rationale)
        raise MalformedDecision(f"unknown decision kind: {kind!r}")

    # -- turn orchestration -------------------------------------------------

    def handle_turn(self, requirement: Requirement) -> str:
        self.emit(
            "requirement_received",
            {"turn": requirement.turn, "text": requirement.text},
        )
        try:
            decision = self.decide(requirement)
            if decision.kind == "answer":
                reply = decision.text or APOLOGY
            elif decision.kind == "reuse":
                result = self.data_manager.execute_stored(
                    decision.path, list(decision.argv), decision.stdin_text
                )
                reply = self._compose_reply(requirement, result)
            else:
                reply = self._evolve(requirement, decision)
        except EvowareError as exc:
            self.emit(
                "failure",
                {
                    "turn": requirement.turn,
                    "error": type(exc).__name__,
                    "detail": str(exc)[:500],
                },
            )
            reply = f"I hit an internal problem while working on that: {exc}"
        self.emit("response", {"turn": requirement.turn, "reply": reply})
        self.history.append((requirement.text, reply))
        return reply

    def _evolve(self, requirement: Requirement, decision: LeaderDecision) -> str:
        spec = decision.spec or requirement.text
        suite = None
        feedback = None
        for round_number in range(1, self.config.max_repair_rounds + 1):
            self.emit(
                "generation_started",
                {"turn": requirement.turn, "round": round_number, "spec": spec},
            )
            pool = self.generator.generate_pool(
                GenerationRequest(
                    functionality_spec=spec,
                    tree_summary=self.data_manager.serialized_snapshot(),
                    prior_feedback=feedback,
                    round=round_number,
                ),
                self.config.candidates,
            )
            self.emit(
                "candidates_produced",
                {
                    "turn": requirement.turn,
                    "round": round_number,
                    "count": len(pool),
                    "path": pool.candidates[0].proposed_record.path,
                },
            )
            if suite is None:
                suite = self.validator.propose_suite(spec, self.config.tests)
            report = self.validator.validate(pool, suite, self.data_manager.root)
            payload = report.to_payload()
            payload["turn"] = requirement.turn
            payload["round"] = round_number
            self.emit("validation_report", payload)
            if report.accepted:
                winner = pool.candidates[report.selected_index - 1]
                self.data_manager.merge_artifact(winner.program_text, winner.proposed_record)
                result = self.data_manager.execute_stored(
                    winner.proposed_record.path, list(decision.argv), decision.stdin_text
                )
                return self._compose_reply(requirement, result)
            feedback = report.feedback
        self.emit(
            "failure",
            {
                "turn": requirement.turn,
                "error": "NoConsensus",
                "detail": f"no accepted candidate after {self.config.max_repair_rounds} rounds",
            },
        )
        return (
            "I tried to build that functionality but could not validate a "
            f"trustworthy implementation after {self.config.max_repair_rounds} "
            f"attempts. Last validation feedback:\n{feedback or 'none'}"
        )

    # -- reply composition ---------------------------------------------------

    def _compose_reply(self, requirement: Requirement, result: ExecutionResult) -> str:
        changed = ", ".join(sorted(p for p, _, _ in result.fs_delta)) or "none"
        summary = (
            f"Requirement:\n{requirement.text}\n\n"
            f"Execution status: {result.status}"
            f"{f' ({result.error_class})' if result.is_error else ''}\n"
            f"Output:\n{result.stdout_norm[:2000]}\n"
            f"Files changed: {changed}\n\n"
            "Compose the final reply to the user."
        )
        try:
            response = self._call_leader(summary, responder=True)
            if response.text.strip():
                return response.text.strip()
        except EvowareError:
            pass
        # Deterministic fallback keeps the turn alive when the model is not.
        if result.is_error:
            return (
                f"The invoked functionality failed ({result.error_class}). "
                f"Diagnostics: {result.stderr_tail[-300:]}"
            )
        return result.stdout_norm or "Done."

    def _call_leader(self, prompt: str, responder: bool = False):
        template = "responder" if responder else "leader"
        messages: list[ChatMessage] = [
            ChatMessage("system", load_prompt(template, self.config.prompt_dir))
        ]
        for user_text, reply in self.history[-HISTORY_TURNS:]:
            messages.append(ChatMessage("user", user_text))
            messages.append(ChatMessage("assistant", reply))
        messages.append(ChatMessage("user", prompt))
        request = ChatRequest(
            messages=tuple(messages),
            agent_name="leader",
            request_id=f"leader-{uuid.uuid4().hex[:12]}",
            temperature_hint=0.2,
        )
        return self.gateway.complete(request)
